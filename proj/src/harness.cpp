#include "semmec/harness.hpp"

#include "semmec/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace semmec {

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    out.append(buf, ptr);
}

void append_uint(std::string& out, std::uint64_t v) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    out.append(buf, ptr);
}

std::string state_dump(std::uint64_t slot, const std::vector<TdState>& states,
                       const SlotObservation* obs) {
    std::ostringstream os;
    os.precision(17);
    os << "slot " << slot << " state dump:";
    for (std::size_t n = 0; n < states.size(); ++n) {
        const auto& s = states[n];
        os << "\n  td " << n << ": q_local=" << s.q_local << " q_remote=" << s.q_remote
           << " q_down=" << s.q_down << " x_q=" << s.x_q << " x_r=" << s.x_r
           << " chi_batches=" << s.chi.batches().size() << " min_chi=" << min_chi(s);
        if (obs && n < obs->gains.size())
            os << " gain=" << obs->gains[n] << " arrivals=" << obs->arrivals[n];
    }
    return os.str();
}

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        if (comma == std::string_view::npos) comma = s.size();
        std::string item = trim(s.substr(start, comma - start));
        if (!item.empty()) out.push_back(item);
        start = comma + 1;
    }
    return out;
}

double parse_number(const std::string& text, const std::string& key) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("sweep key '" + key + "': not a number: '" + text + "'");
    return v;
}

const std::vector<std::string>& sweepable() {
    static const std::vector<std::string> names{"V",        "arrival_mean_lambda", "Q_avg", "R_avg",
                                                "beta_min", "num_tds",             "p_exp"};
    return names;
}

} // namespace

double running_mean(const std::vector<double>& series, std::size_t end, std::size_t window) {
    if (series.empty() || window == 0) return 0.0;
    end = std::min(end, series.size() - 1);
    std::size_t begin = end + 1 >= window ? end + 1 - window : 0;
    double s = 0.0;
    for (std::size_t i = begin; i <= end; ++i) s += series[i];
    return s / static_cast<double>(end + 1 - begin);
}

RunResult run(const SystemConfig& cfg_in, Policy policy, std::uint64_t seed,
              const RunOptions& opts) {
    RunResult res;
    res.config = cfg_in;
    if (opts.slots > 0) res.config.horizon_T = opts.slots;
    res.config.seed = seed;
    finalize(res.config);
    const SystemConfig& cfg = res.config;
    const std::size_t N = cfg.num_tds;
    const std::uint64_t T = cfg.horizon_T;
    const std::uint64_t warmup = T > opts.warmup ? opts.warmup : 0;
    const double tau = cfg.slot_tau;

    Summary& sum = res.summary;
    sum.policy = policy_name(policy);
    sum.seed = seed;
    sum.config_hash = config_hash(cfg);
    sum.slots = T;
    sum.warmup = warmup;
    sum.num_tds = N;
    res.trace.config_hash = sum.config_hash;
    res.trace.seed = seed;
    res.trace.policy = policy;
    res.trace.num_tds = N;
    if (opts.keep_trace) res.trace.rows.reserve(static_cast<std::size_t>(T) * N);
    res.slot_energy.reserve(T);
    res.slot_q_total.reserve(T);
    res.slot_rate.reserve(T);
    if (T == 0) return res;

    Simulation sim(cfg, policy, seed, opts.sim);
    std::vector<double> q_full(N, 0.0), q_post(N, 0.0), r_full(N, 0.0), r_post(N, 0.0);
    double e_full = 0.0, e_post = 0.0, e_parts[4] = {0.0, 0.0, 0.0, 0.0};
    double q_all = 0.0, q_all_post = 0.0, r_all = 0.0, r_all_post = 0.0, beta_post = 0.0;
    std::uint64_t rounds = 0;

    for (std::uint64_t t = 0; t < T; ++t) {
        SlotObservation obs;
        const SlotOutcome* out = nullptr;
        try {
            obs = sim.observe();
            PlanResult plan = sim.plan(obs);
            out = &sim.apply(obs, std::move(plan));
        } catch (const std::exception& e) {
            throw RunError(std::string(policy_name(policy)) + " run failed: " + e.what() + "\n" +
                           state_dump(t, sim.states(), &obs));
        }
        const auto& states = sim.states();
        const auto& d = out->plan.decision;
        const bool post = t >= warmup;
        double e_slot = 0.0, q_slot = 0.0, r_slot = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            const TdEnergy& en = out->energy[n];
            const double q = states[n].q_total();
            const double r = out->proc_bits[n] / tau;
            e_slot += en.total();
            q_slot += q;
            r_slot += r;
            e_parts[0] += en.local;
            e_parts[1] += en.uplink;
            e_parts[2] += en.remote;
            e_parts[3] += en.downlink;
            q_full[n] += q;
            r_full[n] += r;
            if (post) {
                q_post[n] += q;
                r_post[n] += r;
                beta_post += d.beta[n];
            }
            if (opts.keep_trace) {
                TraceRow row;
                row.slot = t;
                row.td = n;
                row.energy_total = en.total();
                row.energy_local = en.local;
                row.energy_uplink = en.uplink;
                row.energy_remote = en.remote;
                row.energy_downlink = en.downlink;
                row.q_local = states[n].q_local;
                row.q_remote = states[n].q_remote;
                row.q_down = states[n].q_down;
                row.x_q = states[n].x_q;
                row.x_r = states[n].x_r;
                row.beta = d.beta[n];
                row.tau_u = d.tau_u[n];
                row.tau_d = d.tau_d[n];
                row.f_local = d.f_local[n];
                row.f_remote = d.f_remote[n];
                row.p_uplink = d.p_uplink[n];
                row.p_downlink = d.p_downlink[n];
                row.proc_bits = out->proc_bits[n];
                res.trace.rows.push_back(row);
            }
        }
        e_full += e_slot;
        q_all += q_slot / N;
        r_all += r_slot / N;
        if (post) {
            e_post += e_slot;
            q_all_post += q_slot / N;
            r_all_post += r_slot / N;
        }
        res.slot_energy.push_back(e_slot);
        res.slot_q_total.push_back(q_slot / N);
        res.slot_rate.push_back(r_slot / N);
        rounds += static_cast<std::uint64_t>(out->plan.rounds);
        sum.extraction_flags += static_cast<std::uint64_t>(out->plan.extraction_flags);
        sum.time_clamps += static_cast<std::uint64_t>(out->plan.time_clamps);
        sum.infeasible_targets += out->plan.infeasible_target ? 1 : 0;
        if (t + 1 == T / 2 && T >= 2) {
            const double half = static_cast<double>(T / 2);
            for (const auto& s : states) {
                sum.x_q_half_ratio += s.x_q / half / N;
                sum.x_r_half_ratio += s.x_r / half / N;
            }
        }
    }

    const double Td = static_cast<double>(T);
    const double Tp = static_cast<double>(T - warmup);
    sum.energy = e_full / (Td * tau);
    sum.energy_post = e_post / (Tp * tau);
    sum.energy_local = e_parts[0] / (Td * tau);
    sum.energy_uplink = e_parts[1] / (Td * tau);
    sum.energy_remote = e_parts[2] / (Td * tau);
    sum.energy_downlink = e_parts[3] / (Td * tau);
    sum.q_total = q_all / Td;
    sum.q_total_post = q_all_post / Tp;
    sum.rate = r_all / Td;
    sum.rate_post = r_all_post / Tp;
    sum.beta = beta_post / (Tp * N);
    sum.q_total_worst_td = *std::max_element(q_full.begin(), q_full.end()) / Td;
    sum.q_total_worst_td_post = *std::max_element(q_post.begin(), q_post.end()) / Tp;
    sum.rate_worst_td = *std::min_element(r_full.begin(), r_full.end()) / Td;
    sum.rate_worst_td_post = *std::min_element(r_post.begin(), r_post.end()) / Tp;
    for (const auto& s : sim.states()) {
        sum.x_q_ratio += s.x_q / Td / N;
        sum.x_r_ratio += s.x_r / Td / N;
        sum.backlog_end += (s.x_q + s.x_r) / N;
    }
    sum.mean_rounds = static_cast<double>(rounds) / Td;
    sum.q_violation = sum.q_total_worst_td_post > cfg.Q_avg;
    sum.rate_violation = sum.rate_worst_td_post < cfg.R_avg;
    return res;
}

// ------------------------------------------------------------------ sweeps

SweepSpec parse_sweep_text(std::string_view text) {
    SweepSpec spec;
    bool have_parameter = false, have_values = false;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::string body = trim(line);
        if (body.empty()) continue;
        auto eq = body.find_first_of("=:");
        if (eq == std::string::npos)
            throw ConfigError("sweep line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key == "preset") {
            SweepSpec base = sweep_preset(value);
            if (have_parameter) base.parameter = spec.parameter;
            if (have_values) base.values = spec.values;
            spec = base;
            have_parameter = have_values = true;
        } else if (key == "name") {
            spec.name = value;
        } else if (key == "parameter") {
            spec.parameter = value;
            have_parameter = true;
        } else if (key == "values") {
            spec.values.clear();
            for (const auto& item : split_list(value)) spec.values.push_back(parse_number(item, key));
            have_values = true;
        } else if (key == "policies") {
            spec.policies.clear();
            for (const auto& item : split_list(value)) {
                try {
                    spec.policies.push_back(parse_policy(item));
                } catch (const std::exception&) {
                    throw ConfigError("sweep key 'policies': unknown policy '" + item + "'");
                }
            }
        } else if (key == "replications") {
            double r = parse_number(value, key);
            if (r < 1 || std::floor(r) != r)
                throw ConfigError("sweep key 'replications': expected a positive integer");
            spec.replications = static_cast<int>(r);
        } else if (key == "base_seed") {
            spec.base_seed = std::stoull(value);
        } else if (key == "slots") {
            spec.slots = std::stoull(value);
        } else {
            throw ConfigError("sweep key '" + key + "': unknown");
        }
    }
    if (!have_parameter) throw ConfigError("sweep key 'parameter': missing");
    if (!have_values) throw ConfigError("sweep key 'values': missing");
    if (spec.name.empty()) spec.name = spec.parameter;
    return spec;
}

SweepSpec load_sweep(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("sweep file '" + path.string() + "': cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_sweep_text(ss.str());
}

SweepSpec sweep_preset(std::string_view name) {
    const std::vector<Policy> baselines{Policy::drmsa, Policy::ns, Policy::nl, Policy::myopic};
    SweepSpec s;
    s.name = std::string(name);
    if (name == "fig6-v") {
        s.parameter = "V";
        s.values = {1e15, 3e15, 1e16, 3e16, 1e17};
        s.policies = baselines;
    } else if (name == "fig7-arrivals") {
        s.parameter = "arrival_mean_lambda";
        s.values = {1e6, 2e6, 3e6, 4e6, 5e6};
        s.policies = {Policy::drmsa};
    } else if (name == "fig8-qavg") {
        s.parameter = "Q_avg";
        s.values = {3e6, 3.25e6, 3.5e6, 3.75e6, 4e6};
        s.policies = baselines;
    } else if (name == "fig9-ravg") {
        s.parameter = "R_avg";
        s.values = {3.8e6, 3.9e6, 4.0e6, 4.1e6, 4.2e6, 4.3e6, 4.4e6, 4.5e6};
        s.policies = baselines;
    } else if (name == "fig10-betamin") {
        s.parameter = "beta_min";
        s.values = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3};
        s.policies = {Policy::drmsa};
    } else if (name == "fig11-pexp") {
        s.parameter = "p_exp";
        s.values = {0.5, 1.0, 1.5, 2.0};
        s.policies = {Policy::drmsa};
    } else {
        throw ConfigError("sweep preset '" + std::string(name) + "': unknown");
    }
    return s;
}

std::vector<std::string> sweep_preset_names() {
    return {"fig6-v", "fig7-arrivals", "fig8-qavg", "fig9-ravg", "fig10-betamin", "fig11-pexp"};
}

void validate_sweep(const SweepSpec& spec, const SystemConfig& cfg) {
    const auto& names = sweepable();
    if (std::find(names.begin(), names.end(), spec.parameter) == names.end())
        throw ConfigError("sweep key 'parameter': '" + spec.parameter + "' cannot be swept");
    if (spec.values.empty()) throw ConfigError("sweep key 'values': empty");
    if (spec.policies.empty()) throw ConfigError("sweep key 'policies': empty");
    if (spec.replications < 1) throw ConfigError("sweep key 'replications': must be >= 1");
    for (double v : spec.values) {
        SystemConfig c = cfg;
        set_parameter(c, spec.parameter, v);
    }
}

std::vector<SweepRow> sweep(const SweepSpec& spec, const SystemConfig& cfg, int workers,
                            const SimOptions& sim) {
    validate_sweep(spec, cfg);
    std::vector<SweepRow> rows;
    for (double v : spec.values)
        for (Policy p : spec.policies)
            for (int r = 0; r < spec.replications; ++r) {
                SweepRow row;
                row.parameter = spec.parameter;
                row.value = v;
                row.policy = p;
                row.replication = r;
                row.seed = spec.base_seed + static_cast<std::uint64_t>(r);
                rows.push_back(std::move(row));
            }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            SweepRow& row = rows[i];
            try {
                SystemConfig c = cfg;
                set_parameter(c, row.parameter, row.value);
                RunOptions opts;
                opts.sim = sim;
                opts.keep_trace = false;
                opts.slots = spec.slots;
                row.summary = run(c, row.policy, row.seed, opts).summary;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    workers = std::max(1, std::min<int>(workers, static_cast<int>(rows.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return rows;
}

// ------------------------------------------------------------------ output

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    const std::string policy = policy_name(trace.policy);
    std::string buf;
    buf.reserve(1 << 20);
    buf += kTraceHeader;
    buf += '\n';
    for (const auto& r : trace.rows) {
        append_uint(buf, r.slot);
        buf += ',';
        append_uint(buf, r.td);
        buf += ',';
        buf += policy;
        for (double v : {r.energy_total, r.energy_local, r.energy_uplink, r.energy_remote,
                         r.energy_downlink, r.q_local, r.q_remote, r.q_down, r.x_q, r.x_r, r.beta,
                         r.tau_u, r.tau_d, r.f_local, r.f_remote, r.p_uplink, r.p_downlink,
                         r.proc_bits}) {
            buf += ',';
            append_double(buf, v);
        }
        buf += '\n';
        if (buf.size() > (1 << 20) - 1024) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Trace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw std::runtime_error("'" + path.string() + "': unexpected header");
    Trace trace;
    std::size_t lineno = 1;
    std::uint64_t max_td = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fail = [&] {
            throw std::runtime_error("'" + path.string() + "' line " + std::to_string(lineno) +
                                     ": malformed row");
        };
        const char* p = line.data();
        const char* end = p + line.size();
        TraceRow r;
        auto next_uint = [&](std::uint64_t& v) {
            auto [q, ec] = std::from_chars(p, end, v);
            if (ec != std::errc() || q == end || *q != ',') fail();
            p = q + 1;
        };
        next_uint(r.slot);
        next_uint(r.td);
        const char* comma = std::find(p, end, ',');
        if (comma == end) fail();
        trace.policy = parse_policy(std::string_view(p, static_cast<std::size_t>(comma - p)));
        p = comma + 1;
        double* fields[] = {&r.energy_total, &r.energy_local, &r.energy_uplink, &r.energy_remote,
                            &r.energy_downlink, &r.q_local, &r.q_remote, &r.q_down, &r.x_q,
                            &r.x_r, &r.beta, &r.tau_u, &r.tau_d, &r.f_local, &r.f_remote,
                            &r.p_uplink, &r.p_downlink, &r.proc_bits};
        const std::size_t nf = std::size(fields);
        for (std::size_t i = 0; i < nf; ++i) {
            auto [q, ec] = std::from_chars(p, end, *fields[i]);
            if (ec != std::errc()) fail();
            if (i + 1 < nf) {
                if (q == end || *q != ',') fail();
                p = q + 1;
            } else if (q != end) {
                fail();
            }
        }
        max_td = std::max(max_td, r.td);
        trace.rows.push_back(r);
    }
    trace.num_tds = trace.rows.empty() ? 0 : static_cast<std::size_t>(max_td + 1);
    return trace;
}

std::string summary_json(const Summary& s) {
    nlohmann::ordered_json j;
    j["policy"] = s.policy;
    j["seed"] = s.seed;
    j["config_hash"] = s.config_hash;
    j["slots"] = s.slots;
    j["warmup"] = s.warmup;
    j["num_tds"] = s.num_tds;
    j["energy_J_per_s"] = s.energy;
    j["energy_J_per_s_post"] = s.energy_post;
    j["energy_local_J_per_s"] = s.energy_local;
    j["energy_uplink_J_per_s"] = s.energy_uplink;
    j["energy_remote_J_per_s"] = s.energy_remote;
    j["energy_downlink_J_per_s"] = s.energy_downlink;
    j["q_total_bits"] = s.q_total;
    j["q_total_bits_post"] = s.q_total_post;
    j["q_total_bits_worst_td"] = s.q_total_worst_td;
    j["q_total_bits_worst_td_post"] = s.q_total_worst_td_post;
    j["rate_bits_per_s"] = s.rate;
    j["rate_bits_per_s_post"] = s.rate_post;
    j["rate_bits_per_s_worst_td"] = s.rate_worst_td;
    j["rate_bits_per_s_worst_td_post"] = s.rate_worst_td_post;
    j["beta_post"] = s.beta;
    j["x_q_ratio"] = s.x_q_ratio;
    j["x_r_ratio"] = s.x_r_ratio;
    j["x_q_half_ratio"] = s.x_q_half_ratio;
    j["x_r_half_ratio"] = s.x_r_half_ratio;
    j["backlog_end_bits"] = s.backlog_end;
    j["mean_bcd_rounds"] = s.mean_rounds;
    j["extraction_flags"] = s.extraction_flags;
    j["time_clamps"] = s.time_clamps;
    j["infeasible_targets"] = s.infeasible_targets;
    j["q_violation"] = s.q_violation;
    j["rate_violation"] = s.rate_violation;
    return j.dump(2) + "\n";
}

void write_outputs(const RunResult& result, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + out_dir.string() + "': " + ec.message());
    write_trace_csv(result.trace, out_dir / "trace.csv");
    auto write_text = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        out << text;
        if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
    };
    write_text(out_dir / "summary.json", summary_json(result.summary));
    write_text(out_dir / "config.txt", to_config_text(result.config));
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    std::string buf =
        "parameter,value,policy,replication,seed,energy,energy_post,q_total,q_total_post,"
        "rate,rate_post,x_q_ratio,x_r_ratio,backlog_end,beta_post,q_violation,rate_violation,"
        "error\n";
    for (const auto& r : rows) {
        const Summary& s = r.summary;
        buf += r.parameter;
        buf += ',';
        append_double(buf, r.value);
        buf += ',';
        buf += policy_name(r.policy);
        buf += ',';
        append_uint(buf, static_cast<std::uint64_t>(r.replication));
        buf += ',';
        append_uint(buf, r.seed);
        for (double v : {s.energy, s.energy_post, s.q_total, s.q_total_post, s.rate, s.rate_post,
                         s.x_q_ratio, s.x_r_ratio, s.backlog_end, s.beta}) {
            buf += ',';
            append_double(buf, v);
        }
        buf += s.q_violation ? ",1" : ",0";
        buf += s.rate_violation ? ",1," : ",0,";
        std::string err = r.error;
        std::replace(err.begin(), err.end(), '\n', ' ');
        std::replace(err.begin(), err.end(), ',', ';');
        buf += err;
        buf += '\n';
    }
    out << buf;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace semmec
