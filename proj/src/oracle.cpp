#include "semmec/oracle.hpp"

#include "semmec/errors.hpp"
#include "semmec/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace semmec::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double axis_value(const GridDim& d, int i) {
    if (d.points <= 1) return d.lower;
    return d.lower + (d.upper - d.lower) * static_cast<double>(i) / (d.points - 1);
}

// One exhaustive pass; returns false when nothing is feasible.
bool grid_pass(const GridSpec& spec, const std::vector<GridDim>& dims, GridResult& best) {
    const std::size_t D = dims.size();
    std::vector<int> idx(D, 0);
    Point x(D);
    bool found = false;
    while (true) {
        for (std::size_t j = 0; j < D; ++j) x[j] = axis_value(dims[j], idx[j]);
        bool ok = true;
        for (const auto& c : spec.constraints)
            if (!c(x)) {
                ok = false;
                break;
            }
        if (ok) {
            double v = spec.objective(x);
            if (!found || v < best.value) {
                best.x = x;
                best.value = v;
                found = true;
            }
        }
        // Last dimension varies fastest, so the scan is lexicographic.
        std::size_t j = D;
        while (j > 0) {
            --j;
            if (++idx[j] < dims[j].points) break;
            idx[j] = 0;
            if (j == 0) return found;
        }
        if (D == 0) return found;
    }
}

double scaled_projected(double grad, double x, double lo, double hi, double scale) {
    double r;
    double eps = 1e-12 * std::max(1.0, std::abs(hi == kInf ? x : hi));
    if (hi <= lo + eps) return 0.0;
    if (x <= lo + eps) r = std::max(0.0, -grad);
    else if (x >= hi - eps) r = std::max(0.0, grad);
    else r = std::abs(grad);
    return scale > 0.0 ? r / scale : r;
}

double complementarity(double mult, double mult_scale, double slack, double slack_scale) {
    if (mult <= 0.0) return 0.0;
    double m = mult / (mult + mult_scale);
    return m * std::abs(slack) / std::max(slack_scale, 1e-300);
}

// Per-device convex 1-D minimization on [0, cap] by zooming grids.
template <class F>
double min_1d(F&& f, double cap, int points = 201, int refinements = 4) {
    if (cap <= 0.0) return 0.0;
    GridSpec spec;
    spec.dims = {{0.0, cap, points}};
    spec.objective = [&](const Point& x) { return f(x[0]); };
    spec.refinements = refinements;
    return grid_min(spec).x[0];
}

// Coupled problems: each device picks its grid minimizer of obj_n + m*x_n;
// the oracle keeps the best primal-feasible outcome over a grid of m.
template <class PerDevice, class Primal>
double coupled_oracle(std::size_t N, double m_max, double budget, PerDevice&& pick,
                      Primal&& primal) {
    std::vector<double> x(N);
    double best = kInf;
    auto eval = [&](double m) {
        double sum = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            x[n] = pick(n, m);
            sum += x[n];
        }
        bool feasible = sum <= budget * (1.0 + 1e-12);
        if (feasible) best = std::min(best, primal(x));
        return feasible;
    };
    if (eval(0.0) || m_max <= 0.0) return best;
    double lo = 0.0, hi = m_max * 1.01;
    const int coarse = 121;
    for (int i = 0; i < coarse; ++i) {
        double m = m_max * std::pow(10.0, -12.0 + 12.0 * i / (coarse - 1));
        if (eval(m)) {
            hi = m;
            break;
        }
        lo = m;
    }
    eval(hi);
    for (int pass = 0; pass < 5; ++pass) {
        const int fine = 21;
        double new_lo = lo, new_hi = hi;
        for (int i = 1; i < fine; ++i) {
            double m = lo + (hi - lo) * i / fine;
            if (eval(m)) {
                new_hi = m;
                break;
            }
            new_lo = m;
        }
        lo = new_lo;
        hi = new_hi;
    }
    return best;
}

} // namespace

GridResult grid_min(const GridSpec& spec) {
    for (const auto& d : spec.dims)
        if (d.points < 2 && d.upper != d.lower)
            throw DomainError("grid_min: each dimension needs at least 2 points");
    GridResult best{{}, kInf};
    if (!grid_pass(spec, spec.dims, best)) throw InfeasibleError("grid_min: no feasible grid point");
    std::vector<GridDim> dims = spec.dims;
    for (int pass = 0; pass < spec.refinements; ++pass) {
        for (std::size_t j = 0; j < dims.size(); ++j) {
            double step = dims[j].points > 1 ? (dims[j].upper - dims[j].lower) / (dims[j].points - 1)
                                             : 0.0;
            dims[j].lower = std::max(spec.dims[j].lower, best.x[j] - 2.0 * step);
            dims[j].upper = std::min(spec.dims[j].upper, best.x[j] + 2.0 * step);
        }
        GridResult cand{{}, kInf};
        if (grid_pass(spec, dims, cand) && cand.value < best.value) best = cand;
    }
    return best;
}

LpResult lp_vertex_enum(double cx, double cy, const std::vector<HalfPlane>& planes,
                        double feas_tol) {
    auto feasible = [&](double x, double y) {
        for (const auto& p : planes) {
            double lhs = p.a * x + p.b * y;
            double scale = std::abs(p.a * x) + std::abs(p.b * y) + std::abs(p.c) + 1.0;
            if (lhs > p.c + feas_tol * scale) return false;
        }
        return true;
    };
    bool found = false;
    LpResult best{0.0, 0.0, kInf};
    for (std::size_t i = 0; i < planes.size(); ++i) {
        for (std::size_t j = i + 1; j < planes.size(); ++j) {
            const auto& p = planes[i];
            const auto& q = planes[j];
            double det = p.a * q.b - p.b * q.a;
            if (det == 0.0) continue;
            double x = (p.c * q.b - p.b * q.c) / det;
            double y = (p.a * q.c - p.c * q.a) / det;
            if (!std::isfinite(x) || !std::isfinite(y) || !feasible(x, y)) continue;
            double v = cx * x + cy * y;
            if (!found || v < best.value) {
                best = {x, y, v};
                found = true;
            }
        }
    }
    if (!found) throw InfeasibleError("lp_vertex_enum: empty polytope");
    return best;
}

double KktResidual::worst() const {
    return std::max({stationarity, feasibility, complementarity});
}

// ---------------------------------------------------------------- downlink

namespace {
double downlink_cap(const DownlinkInstance& in, std::size_t n, const SystemConfig& cfg) {
    if (in.tau_d[n] <= 0.0 || in.q_down[n] <= 0.0) return 0.0;
    // Power that moves exactly q_down bits in tau_d seconds.
    return uplink_power(in.h[n], in.q_down[n] / in.tau_d[n], cfg);
}
} // namespace

double downlink_objective(const DownlinkInstance& in, const std::vector<double>& p,
                          const SystemConfig& cfg) {
    double s = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n)
        s += -in.w4[n] * in.tau_d[n] * downlink_rate(in.h[n], p[n], cfg) +
             cfg.V * in.tau_d[n] * p[n];
    return s;
}

KktResidual downlink_kkt(const DownlinkInstance& in, const std::vector<double>& p, double mu,
                         const SystemConfig& cfg) {
    KktResidual r;
    double sum = 0.0, mult_scale = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        sum += p[n];
        if (in.tau_d[n] <= 0.0) continue;
        double gain = in.w4[n] * in.tau_d[n] * cfg.bandwidth_B * in.h[n] /
                      (std::numbers::ln2 * (cfg.noise_power + in.h[n] * p[n]));
        double grad = -gain + cfg.V * in.tau_d[n] + mu;
        double scale = gain + cfg.V * in.tau_d[n] + mu;
        r.stationarity = std::max(
            r.stationarity, scaled_projected(grad, p[n], 0.0, downlink_cap(in, n, cfg), scale));
        mult_scale = std::max(mult_scale, gain + cfg.V * in.tau_d[n]);
    }
    r.feasibility = std::max(0.0, sum - cfg.P_mec) / cfg.P_mec;
    r.complementarity = complementarity(mu, mult_scale, cfg.P_mec - sum, cfg.P_mec);
    return r;
}

double downlink_oracle(const DownlinkInstance& in, const SystemConfig& cfg) {
    const std::size_t N = in.w4.size();
    double m_max = 0.0;
    for (std::size_t n = 0; n < N; ++n)
        if (in.tau_d[n] > 0.0)
            m_max = std::max(m_max, in.w4[n] * in.tau_d[n] * cfg.bandwidth_B * in.h[n] /
                                        (std::numbers::ln2 * cfg.noise_power));
    auto pick = [&](std::size_t n, double mu) {
        if (in.tau_d[n] <= 0.0) return 0.0;
        double cap = std::min(downlink_cap(in, n, cfg), cfg.P_mec);
        return min_1d(
            [&](double p) {
                return -in.w4[n] * in.tau_d[n] * downlink_rate(in.h[n], p, cfg) +
                       (cfg.V * in.tau_d[n] + mu) * p;
            },
            cap);
    };
    return coupled_oracle(N, m_max, cfg.P_mec, pick,
                          [&](const std::vector<double>& p) { return downlink_objective(in, p, cfg); });
}

// ------------------------------------------------------------ local/uplink

namespace {
struct LocalCoefs {
    double coef_u, coef_u_abs, c;
};
LocalCoefs local_coefs(const LocalInstance& in, const SystemConfig& cfg) {
    double bk = std::pow(in.beta, cfg.k);
    return {cfg.a * in.w1 / bk - in.w2 / in.beta + in.w3,
            cfg.a * in.w1 / bk + in.w2 / in.beta + in.w3, 1.0 / in.beta - cfg.a / bk};
}
} // namespace

double local_objective(const LocalInstance& in, double f, double r, const SystemConfig& cfg) {
    const double tau = cfg.slot_tau;
    const double I = cfg.intensity_I[in.td];
    auto c = local_coefs(in, cfg);
    return -in.w2 * tau * f / I + c.coef_u * in.tau_u * r +
           cfg.V * (tau * cfg.kappa_local * f * f * f + in.tau_u * uplink_power(in.h, r, cfg));
}

double local_constraint(const LocalInstance& in, double f, double r, const SystemConfig& cfg) {
    auto c = local_coefs(in, cfg);
    return cfg.slot_tau * f / cfg.intensity_I[in.td] + in.tau_u * r * c.c - in.q_local;
}

KktResidual local_kkt(const LocalInstance& in, double f, double r, double rho,
                      const SystemConfig& cfg) {
    KktResidual out;
    const double tau = cfg.slot_tau;
    const double I = cfg.intensity_I[in.td];
    auto c = local_coefs(in, cfg);
    if (in.local_enabled) {
        double cubic = 3.0 * cfg.V * tau * cfg.kappa_local * f * f;
        double grad = -in.w2 * tau / I + cubic + rho * tau / I;
        double scale = in.w2 * tau / I + cubic + rho * tau / I;
        out.stationarity = scaled_projected(grad, f, 0.0, cfg.f_local_max[in.td], scale);
    }
    if (in.tau_u > 0.0) {
        double power_slope = cfg.V * in.tau_u * cfg.noise_power / in.h * std::numbers::ln2 /
                             cfg.bandwidth_B * std::exp2(r / cfg.bandwidth_B);
        double grad = in.tau_u * (c.coef_u + rho * c.c) + power_slope;
        double scale = in.tau_u * (c.coef_u_abs + rho * std::abs(c.c)) + power_slope;
        out.stationarity = std::max(
            out.stationarity,
            scaled_projected(grad, r, 0.0, max_uplink_rate(in.h, in.td, cfg), scale));
    }
    double g = local_constraint(in, f, r, cfg);
    double g_scale = tau * f / I + in.tau_u * r * std::abs(c.c) + in.q_local + 1.0;
    out.feasibility = std::max(0.0, g) / g_scale;
    out.complementarity = complementarity(rho, in.w2 + c.coef_u_abs, g, g_scale);
    return out;
}

GridResult local_oracle(const LocalInstance& in, const SystemConfig& cfg, int points,
                        int refinements) {
    const double f_hi = in.local_enabled ? cfg.f_local_max[in.td] : 0.0;
    const double r_hi = in.tau_u > 0.0 ? max_uplink_rate(in.h, in.td, cfg) : 0.0;
    // Points placed on the constraint may miss it by rounding.
    auto feasible = [&](double f, double r) {
        return local_constraint(in, f, r, cfg) <= 1e-12 * (in.q_local + 1.0);
    };

    GridSpec box;
    box.dims = {{0.0, f_hi, f_hi > 0.0 ? points : 1}, {0.0, r_hi, r_hi > 0.0 ? points : 1}};
    box.objective = [&](const Point& x) { return local_objective(in, x[0], x[1], cfg); };
    box.constraints = {[&](const Point& x) { return feasible(x[0], x[1]); }};
    box.refinements = refinements;
    GridResult best = grid_min(box);

    // A grid never lands on the workload constraint, so the boundary is
    // searched separately with points placed exactly on it.
    const double tau = cfg.slot_tau;
    const double I = cfg.intensity_I[in.td];
    const double c = local_coefs(in, cfg).c;
    auto consider = [&](double f, double r) {
        if (f < 0.0 || f > f_hi || r < 0.0 || r > r_hi || !feasible(f, r)) return;
        double v = local_objective(in, f, r, cfg);
        if (v < best.value) best = {{f, r}, v};
    };
    if (f_hi > 0.0) {
        GridSpec edge;
        edge.dims = {{0.0, r_hi, r_hi > 0.0 ? points : 1}};
        auto f_on_edge = [&](double r) { return (in.q_local - in.tau_u * r * c) * I / tau; };
        edge.objective = [&](const Point& x) {
            return local_objective(in, f_on_edge(x[0]), x[0], cfg);
        };
        edge.constraints = {[&](const Point& x) {
            double f = f_on_edge(x[0]);
            return f >= 0.0 && f <= f_hi;
        }};
        edge.refinements = refinements;
        try {
            auto e = grid_min(edge);
            consider(f_on_edge(e.x[0]), e.x[0]);
        } catch (const InfeasibleError&) {
        }
    }
    if (in.tau_u > 0.0 && c > 0.0) consider(0.0, in.q_local / (in.tau_u * c));
    return best;
}

// --------------------------------------------------------------- extraction

double extraction_objective(const ExtractionInstance& in, double beta, const SystemConfig& cfg) {
    double sent = in.tau_u * in.r_uplink;
    return sent * (cfg.a * in.w1 / std::pow(beta, cfg.k) - in.w2 / beta);
}

double extraction_constraint(const ExtractionInstance& in, double beta, const SystemConfig& cfg) {
    double sent = in.tau_u * in.r_uplink;
    return cfg.slot_tau * in.f_local / cfg.intensity_I[in.td] + sent / beta - in.q_local -
           cfg.a * sent / std::pow(beta, cfg.k);
}

KktResidual extraction_kkt(const ExtractionInstance& in, double beta, double xi,
                           const SystemConfig& cfg) {
    KktResidual out;
    const double M = in.tau_u * in.r_uplink;
    const double k = cfg.k, a = cfg.a;
    const double b = 1.0 / beta;
    const double bk1 = std::pow(b, k - 1.0);
    double grad = M * (a * k * in.w1 * bk1 - in.w2) + xi * M * (1.0 - a * k * bk1);
    double scale = M * (a * k * in.w1 * bk1 + in.w2) + xi * M * (1.0 + a * k * bk1);
    out.stationarity = scaled_projected(grad, b, 1.0, 1.0 / cfg.beta_min, scale);
    double g = extraction_constraint(in, beta, cfg);
    double g_scale = cfg.slot_tau * in.f_local / cfg.intensity_I[in.td] + M * b + in.q_local +
                     a * M * bk1 * b + 1.0;
    out.feasibility = std::max(0.0, g) / g_scale;
    out.complementarity = complementarity(xi, in.w2, g, g_scale);
    return out;
}

GridResult extraction_oracle(const ExtractionInstance& in, const SystemConfig& cfg, double step) {
    int points = static_cast<int>(std::ceil((1.0 - cfg.beta_min) / step)) + 1;
    GridSpec spec;
    spec.dims = {{cfg.beta_min, 1.0, std::max(points, 2)}};
    spec.objective = [&](const Point& x) { return extraction_objective(in, x[0], cfg); };
    spec.constraints = {
        [&](const Point& x) { return extraction_constraint(in, x[0], cfg) <= 0.0; }};
    spec.refinements = 3;
    return grid_min(spec);
}

// ------------------------------------------------------------ time division

namespace {
std::pair<double, double> time_coefs(const TimeInstance& in, const SystemConfig& cfg) {
    double bk = std::pow(in.beta, cfg.k);
    double xu = in.w1 * cfg.a * in.r_uplink / bk - in.w2 * in.r_uplink / in.beta +
                in.w3 * in.r_uplink + cfg.V * in.p_uplink;
    double xd = cfg.V * in.p_downlink - in.w4 * downlink_rate(in.h, in.p_downlink, cfg);
    return {xu, xd};
}
} // namespace

double time_objective(const TimeInstance& in, double tau_u, double tau_d, const SystemConfig& cfg) {
    auto [xu, xd] = time_coefs(in, cfg);
    return xu * tau_u + xd * tau_d;
}

std::vector<HalfPlane> time_polytope(const TimeInstance& in, const SystemConfig& cfg) {
    double bk = std::pow(in.beta, cfg.k);
    double RU = uplink_rate(in.h, in.p_uplink, cfg);
    double RD = downlink_rate(in.h, in.p_downlink, cfg);
    double c = 1.0 / in.beta - cfg.a / bk;
    double slack = in.q_local - cfg.slot_tau * in.f_local / cfg.intensity_I[in.td];
    return {
        {RU * c, 0.0, slack},
        {0.0, RD, in.q_down},
        {1.0, 1.0, cfg.slot_tau},
        {-1.0, 0.0, 0.0},
        {0.0, -1.0, 0.0},
    };
}

LpResult time_oracle(const TimeInstance& in, const SystemConfig& cfg) {
    auto [xu, xd] = time_coefs(in, cfg);
    return lp_vertex_enum(xu, xd, time_polytope(in, cfg));
}

// ------------------------------------------------------------------- remote

namespace {
double remote_phi(const RemoteInstance& in, std::size_t n, const SystemConfig& cfg) {
    return (in.w4[n] * in.H[n] - in.w3[n]) * cfg.slot_tau / (in.G[n] * cfg.intensity_I[n]);
}
double remote_cap(const RemoteInstance& in, std::size_t n, const SystemConfig& cfg) {
    return in.q_remote[n] * in.G[n] * cfg.intensity_I[n] / cfg.slot_tau;
}
} // namespace

double remote_objective(const RemoteInstance& in, const std::vector<double>& f,
                        const SystemConfig& cfg) {
    double s = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n)
        s += remote_phi(in, n, cfg) * f[n] +
             cfg.V * cfg.slot_tau * cfg.kappa_mec * f[n] * f[n] * f[n];
    return s;
}

KktResidual remote_kkt(const RemoteInstance& in, const std::vector<double>& f, double nu,
                       const SystemConfig& cfg) {
    KktResidual r;
    double sum = 0.0, mult_scale = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) {
        sum += f[n];
        double phi = remote_phi(in, n, cfg);
        double cubic = 3.0 * cfg.V * cfg.slot_tau * cfg.kappa_mec * f[n] * f[n];
        double grad = phi + cubic + nu;
        double scale = std::abs(phi) + cubic + nu;
        r.stationarity = std::max(
            r.stationarity, scaled_projected(grad, f[n], 0.0, remote_cap(in, n, cfg), scale));
        mult_scale = std::max(mult_scale, std::abs(phi));
    }
    r.feasibility = std::max(0.0, sum - cfg.F_mec) / cfg.F_mec;
    r.complementarity = complementarity(nu, mult_scale, cfg.F_mec - sum, cfg.F_mec);
    return r;
}

double remote_oracle(const RemoteInstance& in, const SystemConfig& cfg) {
    const std::size_t N = in.w3.size();
    double m_max = 0.0;
    for (std::size_t n = 0; n < N; ++n) m_max = std::max(m_max, -remote_phi(in, n, cfg));
    auto pick = [&](std::size_t n, double nu) {
        double phi = remote_phi(in, n, cfg);
        double cap = std::min(remote_cap(in, n, cfg), cfg.F_mec);
        return min_1d(
            [&](double f) {
                return (phi + nu) * f + cfg.V * cfg.slot_tau * cfg.kappa_mec * f * f * f;
            },
            cap);
    };
    return coupled_oracle(N, m_max, cfg.F_mec, pick,
                          [&](const std::vector<double>& f) { return remote_objective(in, f, cfg); });
}

} // namespace semmec::oracle
