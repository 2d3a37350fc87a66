#pragma once

#include "semmec/config.hpp"
#include "semmec/oracle.hpp"
#include "semmec/rng.hpp"
#include "semmec/solvers.hpp"

#include <cstdint>
#include <string>
#include <vector>

// Seeded random instances of every per-slot subproblem, solved by both the
// closed-form solvers and the brute-force oracles.
namespace semmec::verify {

enum class Subproblem { local_uplink, downlink, extraction, time_division, remote };
const char* subproblem_name(Subproblem s);
std::vector<Subproblem> all_subproblems();

struct VerifyOptions {
    int instances = 1000;
    std::uint64_t seed = 7;
    double gap_tol = 1e-4;
    double lp_gap_tol = 1e-6;
    double kkt_tol = 1e-6;
};

struct SuiteResult {
    Subproblem subproblem;
    int instances = 0;
    int gap_failures = 0;
    int kkt_failures = 0;
    int errors = 0;  // exceptions from either side
    double max_gap = 0.0;
    double max_kkt = 0.0;
    double seconds = 0.0;
    std::string worst;      // instance with the largest gap
    std::string worst_kkt;  // instance with the largest KKT residual
    bool passed() const { return instances > 0 && gap_failures + kkt_failures + errors == 0; }
};

/// A randomized system around the default operating point. Keeps
/// a < beta_min^(k-1)/k so the extraction feasible set is an interval.
SystemConfig random_config(Rng& rng);
TdWeights random_weights(const SystemConfig& cfg, double h, std::size_t td, Rng& rng);
double random_gain(const SystemConfig& cfg, std::size_t td, Rng& rng);

// Scaled gap between a candidate objective and the oracle's best value.
double objective_gap(double candidate, double oracle_value);

SuiteResult run_suite(Subproblem s, const VerifyOptions& opts,
                      const kernels::Table& kern = kernels::active());
std::vector<SuiteResult> run_all(const VerifyOptions& opts,
                                 const kernels::Table& kern = kernels::active());

std::string format_result(const SuiteResult& r, const VerifyOptions& opts);

} // namespace semmec::verify
