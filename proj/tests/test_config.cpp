#include "semmec/config.hpp"
#include "semmec/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace semmec;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

bool error_names(const std::string& text, const std::string& key) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return std::string(e.what()).find(key) != std::string::npos;
    }
    return false;
}

} // namespace

TEST_CASE("empty config gives the default parameter table") {
    SystemConfig cfg = parse_config_text("");
    CHECK(cfg.num_tds == 10);
    CHECK(cfg.V == 1e16);
    CHECK(cfg.bandwidth_B == 2e6);
    CHECK(cfg.slot_tau == 1.0);
    CHECK(cfg.beta_min == doctest::Approx(0.3));
    CHECK(cfg.Q_avg == 20e6);
    CHECK(cfg.R_avg == 4e6);
    CHECK(cfg.horizon_T == 20000);
    REQUIRE(cfg.distances.size() == 10);
    CHECK(cfg.distances.front() == 120.0);
    CHECK(cfg.distances.back() == 255.0);
    CHECK(cfg.arrival_mean_lambda[3] == 3e6);
    // -174 dBm/Hz over 2 MHz
    CHECK(cfg.noise_power == doctest::Approx(7.962e-15).epsilon(1e-3));
}

TEST_CASE("a single override changes exactly one key") {
    auto base = lines_of(to_config_text(parse_config_text("")));
    auto mod = lines_of(to_config_text(parse_config_text("V = 1e15\n")));
    REQUIRE(base.size() == mod.size());
    int diffs = 0;
    for (std::size_t i = 0; i < base.size(); ++i)
        if (base[i] != mod[i]) {
            ++diffs;
            CHECK(mod[i].rfind("V =", 0) == 0);
        }
    CHECK(diffs == 1);
}

TEST_CASE("invalid values and keys are reported by name") {
    CHECK(error_names("beta_min = -0.5", "beta_min"));
    CHECK(error_names("beta_min = 1.5", "beta_min"));
    CHECK(error_names("k = 1", "k"));
    CHECK(error_names("bogus_key = 3", "bogus_key"));
    CHECK(error_names("V = 1\nV = 2", "V"));
    CHECK(error_names("bandwidth_B = 2 parsecs", "bandwidth_B"));
    CHECK(error_names("f_local_max = 1e9, 2e9", "f_local_max"));
}

TEST_CASE("units normalize to SI") {
    SystemConfig cfg = parse_config_text(
        "bandwidth_B = 2 MHz\n"
        "noise_psd = -174 dBm/Hz\n"
        "Q_avg = 3.5 Mbits\n"
        "R_avg: 4 Mbps\n"
        "F_mec = 30 GHz\n"
        "P_mec = 1500 mW\n"
        "slot_tau = 1000 ms   # comment\n"
        "distances = 0.1 km\n");
    CHECK(cfg.bandwidth_B == 2e6);
    CHECK(cfg.noise_psd == doctest::Approx(dbm_per_hz_to_w_per_hz(-174.0)));
    CHECK(cfg.Q_avg == 3.5e6);
    CHECK(cfg.R_avg == 4e6);
    CHECK(cfg.F_mec == 30e9);
    CHECK(cfg.P_mec == doctest::Approx(1.5));
    CHECK(cfg.slot_tau == doctest::Approx(1.0));
    CHECK(cfg.distances.size() == 10);
    CHECK(cfg.distances[7] == doctest::Approx(100.0));
}

TEST_CASE("per-device lists and the device count") {
    SystemConfig cfg = parse_config_text("num_tds = 3\nintensity_I = 60, 70, 80\n");
    CHECK(cfg.num_tds == 3);
    CHECK(cfg.intensity_I == std::vector<double>{60, 70, 80});
    CHECK(cfg.distances.size() == 3);
    CHECK(error_names("num_tds = 3\nintensity_I = 60, 70\n", "intensity_I"));
}

TEST_CASE("canonical text round-trips bit-exactly") {
    SystemConfig cfg = parse_config_text("V = 3.3e15\nnum_tds = 4\ndistances = 101.5, 133, 160.25, 250\n"
                                         "arrival_mode = fixed\nseed = 99\n");
    std::string text = to_config_text(cfg);
    SystemConfig again = parse_config_text(text);
    CHECK(to_config_text(again) == text);
    CHECK(again.distances == cfg.distances);
    CHECK(again.noise_power == cfg.noise_power);
    CHECK(again.arrival_mode == ArrivalMode::fixed);
    CHECK(config_hash(again) == config_hash(cfg));
}

TEST_CASE("config hash matches an independent FNV-1a recomputation") {
    SystemConfig cfg = table_one_defaults();
    finalize(cfg);
    std::string text = to_config_text(cfg);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    CHECK(config_hash(cfg) == buf);
    cfg.V = 1e15;
    CHECK(config_hash(cfg) != buf);
}

TEST_CASE("load_config reads files and reports missing ones") {
    auto path = std::filesystem::temp_directory_path() / "semmec_test_cfg.txt";
    {
        std::ofstream out(path);
        out << "V = 1e17\n";
    }
    CHECK(load_config(path).V == 1e17);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config(path), ConfigError);
}

TEST_CASE("set_parameter edits sweepable fields and validates") {
    SystemConfig cfg = table_one_defaults();
    finalize(cfg);
    set_parameter(cfg, "arrival_mean_lambda", 2e6);
    CHECK(cfg.arrival_mean_lambda == std::vector<double>(10, 2e6));
    set_parameter(cfg, "num_tds", 4);
    CHECK(cfg.num_tds == 4);
    CHECK(cfg.distances.size() == 4);
    CHECK(cfg.distances.back() == 255.0);
    CHECK_THROWS_AS(set_parameter(cfg, "beta_min", 0.0), ConfigError);
    CHECK_THROWS_AS(set_parameter(cfg, "nope", 1.0), ConfigError);
}
