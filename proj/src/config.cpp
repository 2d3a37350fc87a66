#include "semmec/config.hpp"

#include "semmec/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <variant>

namespace semmec {

namespace {

enum class UnitKind { none, freq, psd, intensity, time, bits, rate, power, distance, slots };

using ScalarPtr = double SystemConfig::*;
using VectorPtr = std::vector<double> SystemConfig::*;
using U64Ptr = std::uint64_t SystemConfig::*;
struct CountTag {};
struct ArrivalTag {};
struct ChannelTag {};

using Target = std::variant<ScalarPtr, VectorPtr, U64Ptr, CountTag, ArrivalTag, ChannelTag>;

struct Field {
    const char* name;
    Target target;
    UnitKind unit;
};

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"num_tds", CountTag{}, UnitKind::none},
        {"bandwidth_B", &SystemConfig::bandwidth_B, UnitKind::freq},
        {"noise_psd", &SystemConfig::noise_psd, UnitKind::psd},
        {"intensity_I", &SystemConfig::intensity_I, UnitKind::intensity},
        {"kappa_local", &SystemConfig::kappa_local, UnitKind::none},
        {"kappa_mec", &SystemConfig::kappa_mec, UnitKind::none},
        {"slot_tau", &SystemConfig::slot_tau, UnitKind::time},
        {"V", &SystemConfig::V, UnitKind::none},
        {"a", &SystemConfig::a, UnitKind::none},
        {"k", &SystemConfig::k, UnitKind::none},
        {"p_exp", &SystemConfig::p_exp, UnitKind::none},
        {"U", &SystemConfig::U, UnitKind::none},
        {"Q_avg", &SystemConfig::Q_avg, UnitKind::bits},
        {"R_avg", &SystemConfig::R_avg, UnitKind::rate},
        {"f_local_max", &SystemConfig::f_local_max, UnitKind::freq},
        {"F_mec", &SystemConfig::F_mec, UnitKind::freq},
        {"p_uplink_max", &SystemConfig::p_uplink_max, UnitKind::power},
        {"P_mec", &SystemConfig::P_mec, UnitKind::power},
        {"beta_min", &SystemConfig::beta_min, UnitKind::none},
        {"antenna_gain_A", &SystemConfig::antenna_gain_A, UnitKind::none},
        {"carrier_fc", &SystemConfig::carrier_fc, UnitKind::freq},
        {"pathloss_exp_ell", &SystemConfig::pathloss_exp_ell, UnitKind::none},
        {"rician_gamma", &SystemConfig::rician_gamma, UnitKind::none},
        {"distances", &SystemConfig::distances, UnitKind::distance},
        {"arrival_mean_lambda", &SystemConfig::arrival_mean_lambda, UnitKind::bits},
        {"horizon_T", &SystemConfig::horizon_T, UnitKind::slots},
        {"seed", &SystemConfig::seed, UnitKind::none},
        {"arrival_mode", ArrivalTag{}, UnitKind::none},
        {"channel_mode", ChannelTag{}, UnitKind::none},
    };
    return table;
}

const Field* find_field(std::string_view name) {
    for (const auto& f : fields())
        if (name == f.name) return &f;
    return nullptr;
}

// Canonical unit written by to_config_text.
const char* canonical_unit(UnitKind u) {
    switch (u) {
    case UnitKind::freq: return "Hz";
    case UnitKind::psd: return "W/Hz";
    case UnitKind::intensity: return "cycles/bit";
    case UnitKind::time: return "s";
    case UnitKind::bits: return "bits";
    case UnitKind::rate: return "bits/s";
    case UnitKind::power: return "W";
    case UnitKind::distance: return "m";
    case UnitKind::slots: return "slots";
    case UnitKind::none: break;
    }
    return "";
}

// Converts `v` given in `unit` to SI for the unit kind of `key`.
double to_si(std::string_view key, UnitKind kind, double v, std::string_view unit) {
    auto bad = [&]() -> double {
        throw ConfigError("config key '" + std::string(key) + "': unit '" + std::string(unit) +
                          "' not allowed");
    };
    if (unit.empty()) {
        // A bare number for the PSD is read in its documented unit, dBm/Hz.
        if (kind == UnitKind::psd) return dbm_per_hz_to_w_per_hz(v);
        return v;
    }
    struct Scale {
        const char* name;
        double mult;
    };
    auto lookup = [&](std::initializer_list<Scale> list) -> double {
        for (const auto& s : list)
            if (unit == s.name) return v * s.mult;
        return bad();
    };
    switch (kind) {
    case UnitKind::none: return bad();
    case UnitKind::freq: return lookup({{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}});
    case UnitKind::psd:
        if (unit == "dBm/Hz") return dbm_per_hz_to_w_per_hz(v);
        return lookup({{"W/Hz", 1.0}});
    case UnitKind::intensity: return lookup({{"cycles/bit", 1.0}});
    case UnitKind::time: return lookup({{"s", 1.0}, {"ms", 1e-3}});
    case UnitKind::bits:
        return lookup({{"bits", 1.0}, {"bit", 1.0}, {"kbits", 1e3}, {"Mbits", 1e6}, {"Gbits", 1e9}});
    case UnitKind::rate:
        return lookup({{"bits/s", 1.0}, {"bps", 1.0}, {"kbits/s", 1e3}, {"kbps", 1e3},
                       {"Mbits/s", 1e6}, {"Mbps", 1e6}});
    case UnitKind::power:
        if (unit == "dBm") return std::pow(10.0, (v - 30.0) / 10.0);
        return lookup({{"W", 1.0}, {"mW", 1e-3}});
    case UnitKind::distance: return lookup({{"m", 1.0}, {"km", 1e3}});
    case UnitKind::slots: return lookup({{"slots", 1.0}});
    }
    return bad();
}

std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

struct Token {
    double value;
    std::string unit;
};

Token parse_number(std::string_view key, std::string_view item) {
    item = trim(item);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr == item.data())
        throw ConfigError("config key '" + std::string(key) + "': cannot parse number from '" +
                          std::string(item) + "'");
    std::string_view rest = trim(std::string_view(ptr, item.data() + item.size() - ptr));
    return {v, std::string(rest)};
}

std::uint64_t parse_u64(std::string_view key, std::string_view text) {
    text = trim(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc() && trim(std::string_view(ptr, text.data() + text.size() - ptr)).empty())
        return v;
    // Allow forms like 2e4; must still be a non-negative integer.
    Token t = parse_number(key, text);
    if (!(t.value >= 0.0) || std::floor(t.value) != t.value || t.value > 1.8e19)
        throw ConfigError("config key '" + std::string(key) + "': expected a non-negative integer");
    if (!t.unit.empty() && t.unit != "slots")
        throw ConfigError("config key '" + std::string(key) + "': unit '" + t.unit +
                          "' not allowed");
    return static_cast<std::uint64_t>(t.value);
}

std::string strip_unit(std::string_view key, std::string_view text, std::string_view allowed) {
    text = trim(text);
    auto sp = text.find_first_of(" \t");
    if (sp == std::string_view::npos) return std::string(text);
    std::string_view unit = trim(text.substr(sp));
    if (unit != allowed)
        throw ConfigError("config key '" + std::string(key) + "': unit '" + std::string(unit) +
                          "' not allowed");
    return std::string(trim(text.substr(0, sp)));
}

std::vector<double> parse_list(std::string_view key, UnitKind kind, std::string_view text) {
    std::vector<Token> tokens;
    std::size_t start = 0;
    while (true) {
        auto comma = text.find(',', start);
        tokens.push_back(parse_number(key, text.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    // One unit may trail the list, or every item may carry the same one.
    std::string unit = tokens.back().unit;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
        if (!tokens[i].unit.empty() && tokens[i].unit != unit)
            throw ConfigError("config key '" + std::string(key) + "': mixed units in list");
    std::vector<double> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(to_si(key, kind, t.value, unit));
    return out;
}

void check(bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(std::string("config key '") + key + "': " + what);
}

void check_all(const std::vector<double>& v, const char* key, bool (*pred)(double),
               const char* what) {
    for (double x : v) check(pred(x), key, what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }
bool nonneg_finite(double x) { return std::isfinite(x) && x >= 0.0; }

} // namespace

double dbm_per_hz_to_w_per_hz(double dbm_per_hz) {
    return std::pow(10.0, (dbm_per_hz - 30.0) / 10.0);
}

std::vector<double> even_distances(std::size_t n, double near, double far) {
    std::vector<double> d(n);
    if (n == 1) {
        d[0] = near;
        return d;
    }
    for (std::size_t i = 0; i < n; ++i)
        d[i] = near + (far - near) * static_cast<double>(i) / static_cast<double>(n - 1);
    return d;
}

SystemConfig table_one_defaults(std::size_t num_tds) {
    SystemConfig cfg;
    cfg.num_tds = num_tds;
    cfg.noise_psd = dbm_per_hz_to_w_per_hz(-174.0);
    cfg.intensity_I.assign(num_tds, 70.0);
    cfg.f_local_max.assign(num_tds, 1e9);
    cfg.p_uplink_max.assign(num_tds, 0.3);
    cfg.distances = even_distances(num_tds);
    cfg.arrival_mean_lambda.assign(num_tds, 3e6);
    finalize(cfg);
    return cfg;
}

void resize_devices(SystemConfig& cfg, std::size_t num_tds) {
    check(num_tds >= 1, "num_tds", "must be at least 1");
    double near = 120.0, far = 255.0;
    if (cfg.distances.size() >= 2) {
        auto [lo, hi] = std::minmax_element(cfg.distances.begin(), cfg.distances.end());
        near = *lo;
        far = *hi;
    } else if (cfg.distances.size() == 1) {
        near = far = cfg.distances[0];
    }
    cfg.distances = even_distances(num_tds, near, far);
    for (auto* v : {&cfg.intensity_I, &cfg.f_local_max, &cfg.p_uplink_max,
                    &cfg.arrival_mean_lambda}) {
        double first = v->empty() ? 0.0 : v->front();
        v->assign(num_tds, first);
    }
    cfg.num_tds = num_tds;
}

void finalize(SystemConfig& cfg) {
    check(cfg.num_tds >= 1, "num_tds", "must be at least 1");
    const std::pair<std::vector<double>*, const char*> per_td[] = {
        {&cfg.intensity_I, "intensity_I"},
        {&cfg.f_local_max, "f_local_max"},
        {&cfg.p_uplink_max, "p_uplink_max"},
        {&cfg.distances, "distances"},
        {&cfg.arrival_mean_lambda, "arrival_mean_lambda"},
    };
    for (auto [vec, name] : per_td) {
        if (vec->size() == 1 && cfg.num_tds > 1) vec->assign(cfg.num_tds, vec->front());
        check(vec->size() == cfg.num_tds, name, "needs one value or exactly num_tds values");
    }
    check(positive_finite(cfg.bandwidth_B), "bandwidth_B", "must be > 0");
    check(positive_finite(cfg.noise_psd), "noise_psd", "must be > 0 W/Hz");
    check_all(cfg.intensity_I, "intensity_I", positive_finite, "must be > 0");
    check(nonneg_finite(cfg.kappa_local), "kappa_local", "must be >= 0");
    check(nonneg_finite(cfg.kappa_mec), "kappa_mec", "must be >= 0");
    check(positive_finite(cfg.slot_tau), "slot_tau", "must be > 0");
    check(nonneg_finite(cfg.V), "V", "must be >= 0");
    check(nonneg_finite(cfg.a), "a", "must be >= 0");
    check(std::isfinite(cfg.k) && cfg.k > 1.0, "k", "must be > 1");
    check(positive_finite(cfg.p_exp), "p_exp", "must be > 0");
    check(positive_finite(cfg.U), "U", "must be > 0");
    check(nonneg_finite(cfg.Q_avg), "Q_avg", "must be >= 0");
    check(nonneg_finite(cfg.R_avg), "R_avg", "must be >= 0");
    check_all(cfg.f_local_max, "f_local_max", positive_finite, "must be > 0");
    check(positive_finite(cfg.F_mec), "F_mec", "must be > 0");
    check_all(cfg.p_uplink_max, "p_uplink_max", positive_finite, "must be > 0");
    check(positive_finite(cfg.P_mec), "P_mec", "must be > 0");
    check(std::isfinite(cfg.beta_min) && cfg.beta_min > 0.0 && cfg.beta_min <= 1.0, "beta_min",
          "must lie in (0, 1]");
    check(positive_finite(cfg.antenna_gain_A), "antenna_gain_A", "must be > 0");
    check(positive_finite(cfg.carrier_fc), "carrier_fc", "must be > 0");
    check(nonneg_finite(cfg.pathloss_exp_ell), "pathloss_exp_ell", "must be >= 0");
    check(cfg.rician_gamma >= 0.0 && cfg.rician_gamma <= 1.0, "rician_gamma",
          "must lie in [0, 1]");
    check_all(cfg.distances, "distances", positive_finite, "must be > 0");
    check_all(cfg.arrival_mean_lambda, "arrival_mean_lambda", nonneg_finite, "must be >= 0");
    cfg.noise_power = cfg.noise_psd * cfg.bandwidth_B;
    check(positive_finite(cfg.noise_power), "noise_psd", "noise power must be > 0");
}

SystemConfig parse_config_text(std::string_view text) {
    struct Entry {
        const Field* field;
        std::string key;
        std::string value;
    };
    std::vector<Entry> entries;
    std::size_t num_tds = 10;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find_first_of("=:");
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        const Field* f = find_field(key);
        if (!f) throw ConfigError("config key '" + key + "': unknown key");
        if (value.empty()) throw ConfigError("config key '" + key + "': missing value");
        for (const auto& e : entries)
            if (e.key == key) throw ConfigError("config key '" + key + "': given twice");
        if (std::holds_alternative<CountTag>(f->target)) {
            auto n = parse_u64(key, value);
            check(n >= 1, "num_tds", "must be at least 1");
            num_tds = static_cast<std::size_t>(n);
        }
        entries.push_back({f, std::move(key), std::move(value)});
    }

    SystemConfig cfg = table_one_defaults(num_tds);
    for (const auto& e : entries) {
        std::visit(
            [&](auto target) {
                using T = decltype(target);
                if constexpr (std::is_same_v<T, ScalarPtr>) {
                    auto vals = parse_list(e.key, e.field->unit, e.value);
                    if (vals.size() != 1)
                        throw ConfigError("config key '" + e.key + "': expected a single value");
                    cfg.*target = vals[0];
                } else if constexpr (std::is_same_v<T, VectorPtr>) {
                    cfg.*target = parse_list(e.key, e.field->unit, e.value);
                } else if constexpr (std::is_same_v<T, U64Ptr>) {
                    cfg.*target = parse_u64(e.key, e.value);
                } else if constexpr (std::is_same_v<T, ArrivalTag>) {
                    auto v = strip_unit(e.key, e.value, "");
                    if (v == "stochastic") cfg.arrival_mode = ArrivalMode::stochastic;
                    else if (v == "fixed") cfg.arrival_mode = ArrivalMode::fixed;
                    else throw ConfigError("config key 'arrival_mode': expected stochastic|fixed");
                } else if constexpr (std::is_same_v<T, ChannelTag>) {
                    auto v = strip_unit(e.key, e.value, "");
                    if (v == "stochastic") cfg.channel_mode = ChannelMode::stochastic;
                    else if (v == "fixed") cfg.channel_mode = ChannelMode::fixed;
                    else throw ConfigError("config key 'channel_mode': expected stochastic|fixed");
                }
            },
            e.field->target);
    }
    finalize(cfg);
    return cfg;
}

SystemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config file '" + path.string() + "': cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string to_config_text(const SystemConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) {
        out += f.name;
        out += " = ";
        std::visit(
            [&](auto target) {
                using T = decltype(target);
                if constexpr (std::is_same_v<T, ScalarPtr>) {
                    out += format_double(cfg.*target);
                } else if constexpr (std::is_same_v<T, VectorPtr>) {
                    const auto& v = cfg.*target;
                    for (std::size_t i = 0; i < v.size(); ++i) {
                        if (i) out += ", ";
                        out += format_double(v[i]);
                    }
                } else if constexpr (std::is_same_v<T, U64Ptr>) {
                    out += std::to_string(cfg.*target);
                } else if constexpr (std::is_same_v<T, CountTag>) {
                    out += std::to_string(cfg.num_tds);
                } else if constexpr (std::is_same_v<T, ArrivalTag>) {
                    out += cfg.arrival_mode == ArrivalMode::fixed ? "fixed" : "stochastic";
                } else {
                    out += cfg.channel_mode == ChannelMode::fixed ? "fixed" : "stochastic";
                }
            },
            f.target);
        const char* unit = canonical_unit(f.unit);
        if (*unit && f.unit != UnitKind::slots) {
            out += ' ';
            out += unit;
        }
        out += '\n';
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const SystemConfig& cfg) {
    char buf[17];
    std::uint64_t h = fnv1a64(to_config_text(cfg));
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

void set_parameter(SystemConfig& cfg, std::string_view name, double value) {
    const Field* f = find_field(name);
    if (!f) throw ConfigError("parameter '" + std::string(name) + "': unknown");
    std::visit(
        [&](auto target) {
            using T = decltype(target);
            if constexpr (std::is_same_v<T, ScalarPtr>) {
                cfg.*target = value;
            } else if constexpr (std::is_same_v<T, VectorPtr>) {
                (cfg.*target).assign(cfg.num_tds, value);
            } else if constexpr (std::is_same_v<T, U64Ptr>) {
                check(value >= 0.0 && std::floor(value) == value, f->name,
                      "expected a non-negative integer");
                cfg.*target = static_cast<std::uint64_t>(value);
            } else if constexpr (std::is_same_v<T, CountTag>) {
                check(value >= 1.0 && std::floor(value) == value, "num_tds",
                      "expected a positive integer");
                resize_devices(cfg, static_cast<std::size_t>(value));
            } else {
                throw ConfigError("parameter '" + std::string(name) + "': not numeric");
            }
        },
        f->target);
    finalize(cfg);
}

} // namespace semmec
