#pragma once

#include "semmec/config.hpp"
#include "semmec/kernels.hpp"
#include "semmec/model.hpp"
#include "semmec/queueing.hpp"
#include "semmec/rng.hpp"
#include "semmec/solvers.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semmec {

struct SlotObservation {
    std::vector<double> gains;
    std::vector<double> arrivals;
    std::vector<double> min_chi;
};

struct BcdConfig {
    double objective_rel_tol = 1e-5;
    int max_rounds = 30;
};

struct PlanOptions {
    bool optimize_beta = true;
    bool local_enabled = true;
};

struct PlanResult {
    SlotDecision decision;
    std::vector<double> objective_trace;  // initial value, then one per round
    double local_objective = 0.0;
    double remote_objective = 0.0;
    int rounds = 0;
    int extraction_flags = 0;
    int time_clamps = 0;
    double mu = 0.0;
    double nu = 0.0;
    std::vector<double> rho, xi;
    bool infeasible_target = false;  // myopic only
};

TdWeights compute_weights_td(const TdState& s, double h, std::size_t n, const SystemConfig& cfg);
SlotWeights compute_weights(const std::vector<TdState>& states, const SlotObservation& obs,
                            const SystemConfig& cfg);

// The starting point of the local BCD: beta from `beta`, time split in halves.
SlotDecision warm_start(const std::vector<double>& beta, const SystemConfig& cfg);

// Block coordinate descent over the local side only; f_remote stays 0.
PlanResult plan_local(const SlotWeights& w, const std::vector<TdState>& states,
                      const SlotObservation& obs, const SystemConfig& cfg, const BcdConfig& bcd,
                      const SlotDecision& init, const PlanOptions& opts = {},
                      const kernels::Table& kern = kernels::active());

std::vector<double> intensity_ratios(const SlotObservation& obs, const SystemConfig& cfg);
std::vector<double> result_ratios(const SlotObservation& obs, const SystemConfig& cfg);

/// Full per-slot plan: local BCD followed by remote allocation.
PlanResult plan_slot(const std::vector<TdState>& states, const SlotObservation& obs,
                     const SystemConfig& cfg, const BcdConfig& bcd,
                     const std::optional<SlotDecision>& init = std::nullopt,
                     const PlanOptions& opts = {},
                     const kernels::Table& kern = kernels::active());

enum class Policy { drmsa, ns, nl, myopic, exh };
Policy parse_policy(std::string_view name);
const char* policy_name(Policy p);

struct SimOptions {
    BcdConfig bcd;
    int exh_restarts = 50;
    const kernels::Table* kern = nullptr;  // nullptr: runtime pick
};

/// Bit flows implied by a decision for one device.
SlotFlows decision_flows(const SlotDecision& d, std::size_t n, const SlotObservation& obs,
                         const SystemConfig& cfg);

struct SlotOutcome {
    std::uint64_t slot = 0;
    SlotObservation obs;
    PlanResult plan;
    std::vector<TdEnergy> energy;
    std::vector<double> proc_bits;
};

/// One seeded run of one policy. Arrival and channel streams depend only on
/// (seed, device), so every policy sees the same scenario.
class Simulation {
public:
    Simulation(const SystemConfig& cfg, Policy policy, std::uint64_t seed,
               const SimOptions& opts = {});

    SlotObservation observe();
    PlanResult plan(const SlotObservation& obs);
    // Applies a decision; throws ConsistencyError if it is infeasible.
    const SlotOutcome& apply(const SlotObservation& obs, PlanResult plan);
    const SlotOutcome& step();

    const std::vector<TdState>& states() const { return states_; }
    std::vector<TdState>& mutable_states() { return states_; }
    const SystemConfig& config() const { return cfg_; }
    // Configuration the policy plans with (differs from config() for NS).
    const SystemConfig& planning_config() const { return plan_cfg_; }
    std::uint64_t slot() const { return slot_; }
    Policy policy() const { return policy_; }

private:
    SystemConfig cfg_;
    SystemConfig plan_cfg_;
    Policy policy_;
    std::uint64_t seed_;
    SimOptions opts_;
    const kernels::Table* kern_;
    std::vector<TdState> states_;
    std::vector<Rng> arrival_rng_, channel_rng_;
    std::vector<double> mean_gain_;
    std::vector<double> prev_beta_;
    std::uint64_t slot_ = 0;
    SlotOutcome last_;
};

} // namespace semmec
