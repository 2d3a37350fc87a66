#pragma once

#include "semmec/config.hpp"

#include <deque>

namespace semmec {

struct ChiBatch {
    double factor;
    double remaining_bits;
};

/// Semantic data waiting for remote processing, oldest batch first.
class ChiLedger {
public:
    double min_factor() const;  // 1 when empty
    double total_bits() const;
    // Removes up to `bits` from the front; returns the amount removed.
    double drain(double bits);
    void append(double factor, double bits);
    const std::deque<ChiBatch>& batches() const { return batches_; }
    bool empty() const { return batches_.empty(); }

private:
    std::deque<ChiBatch> batches_;
};

struct TdState {
    double q_local = 0.0, q_remote = 0.0, q_down = 0.0;
    double x_q = 0.0, x_r = 0.0;
    ChiLedger chi;

    double q_total() const { return q_local + q_remote + q_down; }
};

double min_chi(const TdState& s);

double update_local_queue(double q_local, double arrivals, double cost, double local_bits,
                          double offload_raw_bits);
// Bits admitted to the remote queue this slot (never negative).
double admitted_bits(double q_local, double uplink_sem_bits, double local_bits);
double update_remote_queue(double q_remote, double uplink_sem_bits, double processed_sem_bits,
                           double q_local, double local_bits);
double update_downlink_queue(double q_down, double downlink_bits, double H,
                             double processed_sem_bits, double q_remote);
double update_x_q(double x_q, double q_total_next, double Q_avg);
double update_x_r(double x_r, double processed_bits, double tau, double R_avg);

/// Planned bit flows of one device over one slot.
struct SlotFlows {
    double arrivals = 0.0;
    double cost = 0.0;            // extraction workload C
    double local_bits = 0.0;      // tau * R^L
    double uplink_sem_bits = 0.0; // tau_u * R^U
    double beta = 1.0;
    double processed_sem_bits = 0.0; // tau * R^M
    double downlink_bits = 0.0;      // tau_d * R^D
    double H = 0.0;
};

inline double offload_raw_bits(const SlotFlows& f) { return f.uplink_sem_bits / f.beta; }
inline double processed_bits(const SlotFlows& f) { return f.local_bits + offload_raw_bits(f); }

// Ledger and formula may disagree on q_remote by at most this many bits.
inline constexpr double kLedgerTolerance = 1e-6;

/// Applies one slot of transitions for one device. Every right-hand side
/// uses the state from before the call. Throws ConsistencyError if the chi
/// ledger drifts from the queue formula.
void apply_transitions(TdState& s, const SlotFlows& f, const SystemConfig& cfg);

} // namespace semmec
