#include "semmec/solvers.hpp"

#include <algorithm>
#include <numbers>

namespace semmec {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Multiplier-independent constants of the per-device local/uplink problem.
struct LocalTerms {
    double coef_u;      // a*W1/beta^k - W2/beta + W3
    double c;           // 1/beta - a/beta^k
    double rate_scale;  // B*h/(ln2*V*sigma^2); infinite when V = 0
    double r_max;
    double f_max;
    double f_denom;     // 3*V*I*kappa
    double bandwidth;
};

LocalTerms local_terms(const TdWeights& w, double beta, double h, std::size_t td,
                       const SystemConfig& cfg) {
    LocalTerms t;
    double bk = std::pow(beta, cfg.k);
    t.coef_u = cfg.a * w.w1 / bk - w.w2 / beta + w.w3;
    t.c = 1.0 / beta - cfg.a / bk;
    double denom = kLn2 * cfg.V * cfg.noise_power;
    t.rate_scale = denom > 0.0 ? cfg.bandwidth_B * h / denom : INFINITY;
    t.r_max = max_uplink_rate(h, td, cfg);
    t.f_max = cfg.f_local_max[td];
    t.f_denom = 3.0 * cfg.V * cfg.intensity_I[td] * cfg.kappa_local;
    t.bandwidth = cfg.bandwidth_B;
    return t;
}

double freq_at(double w2, double rho, const LocalTerms& t) {
    if (rho >= w2) return 0.0;
    if (t.f_denom <= 0.0) return t.f_max;
    return std::min(std::sqrt((w2 - rho) / t.f_denom), t.f_max);
}

double rate_at(double rho, double tau_u, const LocalTerms& t) {
    if (tau_u <= 0.0) return 0.0;
    double slope = t.coef_u + rho * t.c;  // omega / tau_u
    if (slope >= 0.0) return 0.0;
    double arg = -slope * t.rate_scale;
    // Below 1 the unconstrained optimum is negative; the derivative is
    // positive on the whole box, so the rate stays at 0.
    if (!(arg > 1.0)) return 0.0;
    return std::min(t.bandwidth * std::log2(arg), t.r_max);
}

// Multiplier just below `m`, on the infeasible side of the final bracket.
double below(double m) { return m - 4e-14 * m; }

// Weight on the lower-multiplier point that makes the constraint tight. The
// Lagrangian minimizer jumps at the multiplier when the objective is linear
// in a variable (V = 0); any mix of the minimizers on both sides is again a
// minimizer, and the tight one is primal optimal.
double tight_mix(double resid_hi, double resid_lo) {
    if (!(resid_lo > 0.0) || !(resid_hi < 0.0)) return 0.0;
    return -resid_hi / (resid_lo - resid_hi);
}

} // namespace

double downlink_power_cap(double h, double q_down, double tau_d, const SystemConfig& cfg) {
    if (tau_d <= 0.0 || q_down <= 0.0) return 0.0;
    return cfg.noise_power / h * std::expm1(q_down * kLn2 / (cfg.bandwidth_B * tau_d));
}

DownlinkResult solve_downlink_power(const SlotWeights& w, const std::vector<double>& tau_d,
                                    const std::vector<double>& h,
                                    const std::vector<double>& q_down, const SystemConfig& cfg,
                                    const kernels::Table& kern) {
    const std::size_t N = w.size();
    std::vector<double> num(N), den(N), off(N), cap(N);
    DownlinkResult res;
    res.p.assign(N, 0.0);
    for (std::size_t n = 0; n < N; ++n) {
        if (tau_d[n] <= 0.0 || w[n].w4 <= 0.0) {
            // Masked lane: evaluates to 0 without any 0/0.
            num[n] = 0.0;
            den[n] = 1.0;
            off[n] = 1.0;
            cap[n] = 0.0;
            continue;
        }
        num[n] = w[n].w4 * tau_d[n] * cfg.bandwidth_B / kLn2;
        den[n] = cfg.V * tau_d[n];
        off[n] = cfg.noise_power / h[n];
        cap[n] = downlink_power_cap(h[n], q_down[n], tau_d[n], cfg);
    }
    auto total = [&](double mu) {
        kern.downlink_power(num.data(), den.data(), off.data(), cap.data(), mu, res.p.data(), N);
        double s = 0.0;
        for (double p : res.p) s += p;
        return s - cfg.P_mec;
    };
    res.mu = bisect(total, BisectionSpec{});
    total(res.mu);
    return res;
}

double local_freq_at(const TdWeights& w, double rho, std::size_t td, const SystemConfig& cfg) {
    return freq_at(w.w2, rho, local_terms(w, 1.0, 1.0, td, cfg));
}

double uplink_rate_at(const TdWeights& w, double rho, double beta, double tau_u, double h,
                      std::size_t td, const SystemConfig& cfg) {
    return rate_at(rho, tau_u, local_terms(w, beta, h, td, cfg));
}

LocalUplinkResult solve_local_and_uplink(const TdWeights& w, double beta, double tau_u, double h,
                                         double q_local, std::size_t td, const SystemConfig& cfg,
                                         bool local_enabled) {
    const LocalTerms t = local_terms(w, beta, h, td, cfg);
    const double tau = cfg.slot_tau;
    const double I = cfg.intensity_I[td];
    LocalUplinkResult res;
    auto residual = [&](double rho) {
        double f = local_enabled ? freq_at(w.w2, rho, t) : 0.0;
        double r = rate_at(rho, tau_u, t);
        return tau * f / I + tau_u * r * t.c - q_local;
    };
    res.rho = bisect(residual, BisectionSpec{});
    res.f_local = local_enabled ? freq_at(w.w2, res.rho, t) : 0.0;
    res.r_uplink = rate_at(res.rho, tau_u, t);
    const double slack = residual(res.rho);
    if (res.rho > 0.0 && slack < -1e-12 * (q_local + 1.0)) {
        const double lo = below(res.rho);
        const double theta = tight_mix(slack, residual(lo));
        if (theta > 0.0) {
            double f_lo = local_enabled ? freq_at(w.w2, lo, t) : 0.0;
            res.f_local += theta * (f_lo - res.f_local);
            res.r_uplink += theta * (rate_at(lo, tau_u, t) - res.r_uplink);
        }
    }
    return res;
}

ExtractionResult solve_extraction_factor(const TdWeights& w, double f_local, double r_uplink,
                                         double tau_u, double q_local, std::size_t td,
                                         const SystemConfig& cfg, double beta_init) {
    ExtractionResult res;
    res.beta = beta_init;
    const double M = tau_u * r_uplink;
    if (M <= 0.0) return res;
    if (cfg.beta_min >= 1.0) {
        res.beta = 1.0;
        return res;
    }
    const double k = cfg.k, a = cfg.a;
    const double b_max = 1.0 / cfg.beta_min;
    const double base = cfg.slot_tau * f_local / cfg.intensity_I[td] - q_local;
    const bool linear = w.w1 * a <= 1e-30;
    double br = std::clamp(1.0 / beta_init, 1.0, b_max);

    for (int it = 1; it <= 50; ++it) {
        // Linearized constraint: slope * b - rhs <= 0, tight at br.
        const double slope = M * (1.0 - a * k * std::pow(br, k - 1.0));
        const double rhs = -base + a * M * (1.0 - k) * std::pow(br, k);
        auto b_of = [&](double xi) {
            double s = w.w2 - xi * slope / M;
            if (s <= 0.0) return 1.0;
            if (linear) return b_max;
            double omega4 = std::pow(s / (k * a * w.w1), 1.0 / (k - 1.0));
            return std::clamp(omega4, 1.0, b_max);
        };
        auto residual = [&](double xi) { return slope * b_of(xi) - rhs; };
        double xi = 0.0, b_next;
        if (residual(0.0) > 0.0 && slope * br - rhs > 1e-9 * (std::abs(rhs) + M * br)) {
            // The incumbent violates the constraint, so the inner
            // approximation is empty.
            res.flagged = true;
            return res;
        }
        if (linear) {
            // Objective -W2*M*b is linear: take the largest feasible b. The
            // dual rule would jump between the two ends here.
            if (w.w2 <= 0.0) {
                b_next = br;
            } else if (slope > 0.0 && rhs / slope < b_max) {
                b_next = std::max(1.0, rhs / slope);
                xi = w.w2 * M / slope;
            } else {
                b_next = b_max;
            }
        } else {
            try {
                xi = bisect(residual, BisectionSpec{});
            } catch (const ConvergenceError&) {
                res.flagged = true;
                return res;
            }
            b_next = b_of(xi);
            // With the constraint active, land on its boundary exactly
            // instead of through the approximate multiplier.
            if (xi > 0.0 && slope != 0.0) b_next = std::clamp(rhs / slope, 1.0, b_max);
        }
        res.xi = xi;
        res.iterations = it;
        double beta_prev = 1.0 / br;
        br = b_next;
        if (std::abs(1.0 / br - beta_prev) <= 1e-6) break;
    }
    res.beta = std::clamp(1.0 / br, cfg.beta_min, 1.0);
    // The last multiplier belongs to the linearization at the previous
    // iterate; restate it against the exact constraint at the result.
    if (res.xi > 0.0 && br > 1.0 && br < b_max) {
        const double bk1 = std::pow(br, k - 1.0);
        const double g_slope = M * (1.0 - a * k * bk1);
        if (g_slope > 0.0) res.xi = std::max(0.0, M * (w.w2 - a * k * w.w1 * bk1) / g_slope);
    }
    return res;
}

TimeSplit solve_time_division(const TdWeights& w, double f_local, double r_uplink,
                              double p_uplink, double p_downlink, double beta, double h,
                              double q_local, double q_down, std::size_t td,
                              const SystemConfig& cfg) {
    const double tau = cfg.slot_tau;
    const double bk = std::pow(beta, cfg.k);
    const double RU = uplink_rate(h, p_uplink, cfg);
    const double RD = downlink_rate(h, p_downlink, cfg);
    const double xi_u = w.w1 * cfg.a * r_uplink / bk - w.w2 * r_uplink / beta +
                        w.w3 * r_uplink + cfg.V * p_uplink;
    const double xi_d = cfg.V * p_downlink - w.w4 * RD;
    const double c = 1.0 / beta - cfg.a / bk;
    const double slack = q_local - tau * f_local / cfg.intensity_I[td];
    const double d_cap = RD > 0.0 ? std::min(tau, q_down / RD) : tau;

    TimeSplit out;
    auto note = [&](double raw, double fixed) {
        if (std::abs(raw - fixed) > 1e-12 * tau) out.clamped = true;
        return fixed;
    };

    if (c >= 0.0) {
        // tau_u bounded above by theta.
        double theta = (RU * c > 0.0) ? slack / (RU * c) : INFINITY;
        double th = note(std::min(theta, tau), std::clamp(theta, 0.0, tau));
        if (xi_u >= 0.0 && xi_d >= 0.0) {
            out.tau_u = 0.0;
            out.tau_d = 0.0;
        } else if (xi_u >= 0.0) {
            out.tau_u = 0.0;
            out.tau_d = d_cap;
        } else if (xi_d >= 0.0) {
            out.tau_u = th;
            out.tau_d = 0.0;
        } else if (xi_u <= xi_d) {
            out.tau_u = th;
            out.tau_d = note(tau - th, std::min(tau - th, d_cap));
        } else {
            out.tau_d = d_cap;
            out.tau_u = note(tau - d_cap, std::min(tau - d_cap, th));
        }
    } else {
        // tau_u bounded below by theta.
        double theta = RU > 0.0 ? slack / (RU * c) : 0.0;
        if (theta > tau) out.clamped = true;
        double lo = std::clamp(theta, 0.0, tau);
        if (xi_u >= 0.0 && xi_d >= 0.0) {
            out.tau_u = lo;
            out.tau_d = 0.0;
        } else if (xi_u >= 0.0) {
            out.tau_u = lo;
            out.tau_d = std::min(d_cap, tau - lo);
        } else if (xi_d <= xi_u) {
            // Downlink earns more per second; whatever it leaves goes to the
            // uplink, which also has a negative coefficient.
            out.tau_d = std::min(d_cap, tau - lo);
            out.tau_u = tau - out.tau_d;
        } else {
            out.tau_u = tau;
            out.tau_d = 0.0;
        }
    }
    out.tau_u = std::max(0.0, out.tau_u);
    out.tau_d = std::max(0.0, out.tau_d);
    return out;
}

RemoteResult solve_remote_allocation(const SlotWeights& w, const std::vector<double>& q_remote,
                                     const std::vector<double>& G, const std::vector<double>& H,
                                     const SystemConfig& cfg, const kernels::Table& kern) {
    const std::size_t N = w.size();
    const double tau = cfg.slot_tau;
    std::vector<double> phi(N), d(N, 3.0 * cfg.V * tau * cfg.kappa_mec), cap(N);
    RemoteResult res;
    res.f.assign(N, 0.0);
    for (std::size_t n = 0; n < N; ++n) {
        double gi = G[n] * cfg.intensity_I[n];
        phi[n] = (w[n].w4 * H[n] * tau - w[n].w3 * tau) / gi;
        cap[n] = q_remote[n] > 0.0 ? q_remote[n] * gi / tau : 0.0;
    }
    auto total = [&](double nu) {
        kern.remote_freq(phi.data(), d.data(), cap.data(), nu, res.f.data(), N);
        double s = 0.0;
        for (double f : res.f) s += f;
        return s - cfg.F_mec;
    };
    res.nu = bisect(total, BisectionSpec{});
    const double slack = total(res.nu);
    if (res.nu > 0.0 && slack < -1e-12 * cfg.F_mec) {
        std::vector<double> hi = res.f;
        const double theta = tight_mix(slack, total(below(res.nu)));
        for (std::size_t n = 0; n < N; ++n) res.f[n] = hi[n] + theta * (res.f[n] - hi[n]);
    }
    return res;
}

double local_objective_td(const TdWeights& w, const SlotDecision& d, std::size_t n, double h,
                          const SystemConfig& cfg) {
    const double tau = cfg.slot_tau;
    const double beta = d.beta[n];
    const double sent = d.tau_u[n] * d.r_uplink[n];
    const double C = cfg.a * sent / std::pow(beta, cfg.k);
    const double RD = downlink_rate(h, d.p_downlink[n], cfg);
    const double processed = tau * d.f_local[n] / cfg.intensity_I[n] + sent / beta;
    const double energy = tau * local_power(d.f_local[n], cfg.kappa_local) +
                          d.tau_u[n] * d.p_uplink[n] + d.tau_d[n] * d.p_downlink[n];
    return w.w1 * C + w.w3 * sent - w.w2 * processed - w.w4 * d.tau_d[n] * RD + cfg.V * energy;
}

double eval_local_objective(const SlotWeights& w, const SlotDecision& d,
                            const std::vector<double>& h, const SystemConfig& cfg) {
    double s = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) s += local_objective_td(w[n], d, n, h[n], cfg);
    return s;
}

double eval_remote_objective(const SlotWeights& w, const std::vector<double>& f_remote,
                             const std::vector<double>& G, const std::vector<double>& H,
                             const SystemConfig& cfg) {
    const double tau = cfg.slot_tau;
    double s = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
        double f = f_remote[n];
        s += (w[n].w4 * H[n] * tau - w[n].w3 * tau) * f / (G[n] * cfg.intensity_I[n]) +
             cfg.V * tau * local_power(f, cfg.kappa_mec);
    }
    return s;
}

} // namespace semmec
