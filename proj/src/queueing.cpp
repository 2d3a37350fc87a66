#include "semmec/queueing.hpp"

#include "semmec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace semmec {

namespace {
// Batches smaller than this are dropped rather than kept as rounding dust.
constexpr double kDustBits = 1e-9;
} // namespace

double ChiLedger::min_factor() const {
    double m = 1.0;
    for (const auto& b : batches_) m = std::min(m, b.factor);
    return m;
}

double ChiLedger::total_bits() const {
    double s = 0.0;
    for (const auto& b : batches_) s += b.remaining_bits;
    return s;
}

double ChiLedger::drain(double bits) {
    double removed = 0.0;
    while (bits > 0.0 && !batches_.empty()) {
        auto& front = batches_.front();
        double take = std::min(front.remaining_bits, bits);
        front.remaining_bits -= take;
        bits -= take;
        removed += take;
        if (front.remaining_bits <= kDustBits) {
            removed += front.remaining_bits;
            batches_.pop_front();
        }
    }
    return removed;
}

void ChiLedger::append(double factor, double bits) {
    if (bits > kDustBits) batches_.push_back({factor, bits});
}

double min_chi(const TdState& s) { return s.chi.min_factor(); }

double update_local_queue(double q_local, double arrivals, double cost, double local_bits,
                          double offload_raw_bits) {
    return arrivals + std::max(0.0, q_local + cost - local_bits - offload_raw_bits);
}

double admitted_bits(double q_local, double uplink_sem_bits, double local_bits) {
    return std::max(0.0, std::min(uplink_sem_bits, q_local - local_bits));
}

double update_remote_queue(double q_remote, double uplink_sem_bits, double processed_sem_bits,
                           double q_local, double local_bits) {
    return std::max(0.0, q_remote - processed_sem_bits) +
           admitted_bits(q_local, uplink_sem_bits, local_bits);
}

double update_downlink_queue(double q_down, double downlink_bits, double H,
                             double processed_sem_bits, double q_remote) {
    return std::max(0.0, q_down - downlink_bits) + H * std::min(processed_sem_bits, q_remote);
}

double update_x_q(double x_q, double q_total_next, double Q_avg) {
    return std::max(0.0, x_q + q_total_next - Q_avg);
}

double update_x_r(double x_r, double processed_bits, double tau, double R_avg) {
    return std::max(0.0, x_r - processed_bits + tau * R_avg);
}

void apply_transitions(TdState& s, const SlotFlows& f, const SystemConfig& cfg) {
    const TdState before = s;
    double admitted = admitted_bits(before.q_local, f.uplink_sem_bits, f.local_bits);
    double q_remote_formula = update_remote_queue(before.q_remote, f.uplink_sem_bits,
                                                  f.processed_sem_bits, before.q_local,
                                                  f.local_bits);
    s.q_local = update_local_queue(before.q_local, f.arrivals, f.cost, f.local_bits,
                                   offload_raw_bits(f));
    s.q_down = update_downlink_queue(before.q_down, f.downlink_bits, f.H, f.processed_sem_bits,
                                     before.q_remote);

    s.chi.drain(f.processed_sem_bits);
    s.chi.append(f.beta, admitted);
    s.q_remote = s.chi.total_bits();
    if (std::abs(s.q_remote - q_remote_formula) > kLedgerTolerance)
        throw ConsistencyError("chi ledger holds " + std::to_string(s.q_remote) +
                               " bits but the remote queue formula gives " +
                               std::to_string(q_remote_formula));

    s.x_q = update_x_q(before.x_q, s.q_total(), cfg.Q_avg);
    s.x_r = update_x_r(before.x_r, processed_bits(f), cfg.slot_tau, cfg.R_avg);
}

} // namespace semmec
