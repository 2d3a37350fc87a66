#pragma once

#include "semmec/config.hpp"

#include <functional>
#include <vector>

// Brute-force references for the per-slot solvers. Nothing in here calls
// solver code; only the core-model formulas are shared.
namespace semmec::oracle {

struct GridDim {
    double lower;
    double upper;
    int points;
};

using Point = std::vector<double>;

struct GridSpec {
    std::vector<GridDim> dims;
    std::function<double(const Point&)> objective;
    std::vector<std::function<bool(const Point&)>> constraints;  // true when satisfied
    // Extra passes on a window of +-2 steps around the incumbent.
    int refinements = 0;
};

struct GridResult {
    Point x;
    double value;
};

/// Exhaustive search; ties go to the lexicographically smallest index.
/// Throws InfeasibleError when no grid point satisfies the constraints.
GridResult grid_min(const GridSpec& spec);

// a*x + b*y <= c
struct HalfPlane {
    double a, b, c;
};

struct LpResult {
    double x, y, value;
};

/// Minimizes cx*x + cy*y over the intersection of half-planes by checking
/// every pairwise vertex. Throws InfeasibleError on an empty polytope.
LpResult lp_vertex_enum(double cx, double cy, const std::vector<HalfPlane>& planes,
                        double feas_tol = 1e-9);

struct KktResidual {
    double stationarity = 0.0;
    double feasibility = 0.0;
    double complementarity = 0.0;
    double worst() const;
};

// --- subproblem descriptions, restated independently of the solvers -------

struct DownlinkInstance {
    std::vector<double> w4, tau_d, h, q_down;
};
double downlink_objective(const DownlinkInstance& in, const std::vector<double>& p,
                          const SystemConfig& cfg);
KktResidual downlink_kkt(const DownlinkInstance& in, const std::vector<double>& p, double mu,
                         const SystemConfig& cfg);
// Best feasible objective from per-device grids under a grid over mu.
double downlink_oracle(const DownlinkInstance& in, const SystemConfig& cfg);

struct LocalInstance {
    double w1, w2, w3;
    double beta, tau_u, h, q_local;
    std::size_t td;
    bool local_enabled = true;
};
double local_objective(const LocalInstance& in, double f, double r, const SystemConfig& cfg);
double local_constraint(const LocalInstance& in, double f, double r, const SystemConfig& cfg);
KktResidual local_kkt(const LocalInstance& in, double f, double r, double rho,
                      const SystemConfig& cfg);
GridResult local_oracle(const LocalInstance& in, const SystemConfig& cfg, int points = 201,
                        int refinements = 4);

struct ExtractionInstance {
    double w1, w2;
    double f_local, r_uplink, tau_u, q_local;
    std::size_t td;
};
double extraction_objective(const ExtractionInstance& in, double beta, const SystemConfig& cfg);
double extraction_constraint(const ExtractionInstance& in, double beta, const SystemConfig& cfg);
// Stationarity in the reciprocal variable 1/beta with multiplier xi.
KktResidual extraction_kkt(const ExtractionInstance& in, double beta, double xi,
                           const SystemConfig& cfg);
// Grid over beta with the given step on the original problem.
GridResult extraction_oracle(const ExtractionInstance& in, const SystemConfig& cfg,
                             double step = 1e-4);

struct TimeInstance {
    double w1, w2, w3, w4;
    double f_local, r_uplink, p_uplink, p_downlink, beta, h, q_local, q_down;
    std::size_t td;
};
double time_objective(const TimeInstance& in, double tau_u, double tau_d, const SystemConfig& cfg);
std::vector<HalfPlane> time_polytope(const TimeInstance& in, const SystemConfig& cfg);
LpResult time_oracle(const TimeInstance& in, const SystemConfig& cfg);

struct RemoteInstance {
    std::vector<double> w3, w4, q_remote, G, H;
};
double remote_objective(const RemoteInstance& in, const std::vector<double>& f,
                        const SystemConfig& cfg);
KktResidual remote_kkt(const RemoteInstance& in, const std::vector<double>& f, double nu,
                       const SystemConfig& cfg);
double remote_oracle(const RemoteInstance& in, const SystemConfig& cfg);

} // namespace semmec::oracle
