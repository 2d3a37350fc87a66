#pragma once

#include "semmec/scheduler.hpp"

namespace semmec {

// Planning config for the no-semantics baseline: no extraction cost and a
// singleton extraction range.
SystemConfig ns_config(const SystemConfig& cfg);

PlanResult plan_ns(const std::vector<TdState>& states, const SlotObservation& obs,
                   const SystemConfig& ns_cfg, const BcdConfig& bcd, const SlotDecision& init,
                   const kernels::Table& kern = kernels::active());

PlanResult plan_nl(const std::vector<TdState>& states, const SlotObservation& obs,
                   const SystemConfig& cfg, const BcdConfig& bcd, const SlotDecision& init,
                   const kernels::Table& kern = kernels::active());

/// Per-slot energy minimum subject to processing R_avg per device, blind to
/// every queue. Sets infeasible_target when some device cannot reach R_avg.
PlanResult plan_myopic(const SlotObservation& obs, const SystemConfig& cfg);

/// Best of `restarts` BCD runs: restart 0 starts from `warm`, the others from
/// random points drawn from make_stream(seed, "exh", slot, restart).
PlanResult plan_exh(const std::vector<TdState>& states, const SlotObservation& obs,
                    const SystemConfig& cfg, const BcdConfig& bcd, const SlotDecision& warm,
                    int restarts, std::uint64_t seed, std::uint64_t slot,
                    const kernels::Table& kern = kernels::active());

} // namespace semmec
