#include "semmec/errors.hpp"
#include "semmec/harness.hpp"
#include "semmec/kernels.hpp"
#include "semmec/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

using namespace semmec;

namespace {

SystemConfig load_or_default(const std::string& path) {
    if (path.empty()) {
        SystemConfig cfg = table_one_defaults();
        finalize(cfg);
        return cfg;
    }
    return load_config(path);
}

const kernels::Table& pick_kernels(const std::string& isa) {
    return isa.empty() ? kernels::active() : kernels::table(kernels::parse_isa(isa));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic-aware MEC resource allocation simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, algo = "drmsa", sweep_arg, isa;
    std::optional<std::uint64_t> seed;
    std::uint64_t slots = 0, warmup = 2000;
    int restarts = 50, workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    int instances = 1000;

    auto* run_cmd = app.add_subcommand("run", "Simulate one policy and write trace, summary, config");
    run_cmd->add_option("--config", config_path, "Config file (defaults when omitted)");
    run_cmd->add_option("--out", out_dir, "Output directory")->default_val("out/run");
    run_cmd->add_option("--seed", seed, "Root seed (config value when omitted)");
    run_cmd->add_option("--algo", algo, "Policy")
        ->check(CLI::IsMember({"drmsa", "ns", "nl", "myopic", "exh"}))
        ->default_val("drmsa");
    run_cmd->add_option("--slots", slots, "Horizon override");
    run_cmd->add_option("--warmup", warmup, "Slots excluded from *_post averages")->default_val(2000);
    run_cmd->add_option("--restarts", restarts, "EXH starting points")->default_val(50);
    run_cmd->add_option("--isa", isa, "Kernel variant: scalar, avx2 or neon");

    auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep and write sweep.csv");
    sweep_cmd->add_option("--config", config_path, "Base config file");
    sweep_cmd->add_option("--out", out_dir, "Output directory")->default_val("out/sweep");
    sweep_cmd->add_option("--sweep", sweep_arg, "Sweep file or preset name")->required();
    sweep_cmd->add_option("--seed", seed, "Base seed override");
    sweep_cmd->add_option("--slots", slots, "Horizon override");
    sweep_cmd->add_option("--workers", workers, "Parallel cells");
    sweep_cmd->add_option("--restarts", restarts, "EXH starting points")->default_val(50);
    sweep_cmd->add_option("--isa", isa, "Kernel variant: scalar, avx2 or neon");

    auto* verify_cmd = app.add_subcommand("verify", "Check every solver against its oracle");
    verify_cmd->add_option("--instances", instances, "Instances per solver")->default_val(1000);
    verify_cmd->add_option("--seed", seed, "Instance seed");
    verify_cmd->add_option("--isa", isa, "Kernel variant: scalar, avx2 or neon");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            SystemConfig cfg = load_or_default(config_path);
            RunOptions opts;
            opts.slots = slots;
            opts.warmup = warmup;
            opts.sim.exh_restarts = restarts;
            opts.sim.kern = &pick_kernels(isa);
            RunResult res = run(cfg, parse_policy(algo), seed.value_or(cfg.seed), opts);
            write_outputs(res, out_dir);
            std::cout << summary_json(res.summary);
            std::cerr << "wrote " << out_dir << "/{trace.csv,summary.json,config.txt}\n";
            return 0;
        }
        if (*sweep_cmd) {
            SystemConfig cfg = load_or_default(config_path);
            SweepSpec spec = std::filesystem::exists(sweep_arg) ? load_sweep(sweep_arg)
                                                                : sweep_preset(sweep_arg);
            if (seed) spec.base_seed = *seed;
            if (slots) spec.slots = slots;
            SimOptions sim;
            sim.exh_restarts = restarts;
            sim.kern = &pick_kernels(isa);
            auto rows = sweep(spec, cfg, workers, sim);
            std::filesystem::create_directories(out_dir);
            write_sweep_csv(rows, std::filesystem::path(out_dir) / "sweep.csv");
            int failed = 0;
            for (const auto& r : rows) {
                if (!r.error.empty()) {
                    ++failed;
                    std::printf("%s=%g %-6s rep %d  ERROR %s\n", r.parameter.c_str(), r.value,
                                policy_name(r.policy), r.replication, r.error.c_str());
                    continue;
                }
                std::printf("%s=%g %-6s rep %d  energy %.4f J/s  Q %.4g bits  rate %.4g bits/s\n",
                            r.parameter.c_str(), r.value, policy_name(r.policy), r.replication,
                            r.summary.energy_post, r.summary.q_total_post, r.summary.rate_post);
            }
            std::cerr << "wrote " << out_dir << "/sweep.csv\n";
            return failed ? 1 : 0;
        }
        if (*verify_cmd) {
            verify::VerifyOptions opts;
            opts.instances = instances;
            if (seed) opts.seed = *seed;
            const auto& kern = pick_kernels(isa);
            bool ok = true;
            for (auto s : verify::all_subproblems()) {
                auto r = verify::run_suite(s, opts, kern);
                std::cout << verify::format_result(r, opts) << std::endl;
                ok = ok && r.passed();
            }
            return ok ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
