// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

// Command-line driver: simulate the controlled equation, emit saturation
// certificates, run the scaled-limit probe, synthesize steering schedules, and
// run the verification matrix.

#include "chsteer/acceptance.hpp"
#include "chsteer/saturation.hpp"
#include "chsteer/solver.hpp"
#include "chsteer/steering.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace chsteer;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitBlowUp = 2;
constexpr int kExitFailure = 3;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> sets;
    std::uint64_t seed = 20260809;
    int jobs = 1;
};

json load_config(const CommonArgs& args) {
    json cfg = json::object();
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw std::invalid_argument("cannot open config " + args.config_path);
        in >> cfg;
    }
    for (const auto& kv : args.sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects KEY=VALUE, got " + kv);
        std::string key = kv.substr(0, eq);
        std::string value = kv.substr(eq + 1);
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::parse_error&) {
            parsed = value;  // plain string
        }
        // dotted path override
        json* node = &cfg;
        std::size_t pos = 0;
        for (;;) {
            auto dot = key.find('.', pos);
            std::string part = key.substr(pos, dot - pos);
            if (dot == std::string::npos) {
                (*node)[part] = parsed;
                break;
            }
            node = &(*node)[part];
            pos = dot + 1;
        }
    }
    return cfg;
}

void write_file(const fs::path& out_dir, const std::string& name, const std::string& body) {
    fs::create_directories(out_dir);
    fs::path p = out_dir / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << body;
}

TrigPoly parse_poly(const json& j) {
    if (j.is_string()) return TrigPoly::parse(j.get<std::string>());
    return TrigPoly::from_json(j);
}

Rational parse_time(const json& j) {
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    return Rational::from_double_exact(j.get<double>());
}

/// Splits the config into the solver block and command keys, rejecting
/// anything unknown.
json take_keys(const json& cfg, const std::vector<std::string>& known) {
    for (const auto& [key, _] : cfg.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument("unknown config key \"" + key + "\"");
    }
    return cfg;
}

std::string invariants_csv(const Trajectory& traj) {
    auto row = [](const std::string& name, const std::vector<double>& q) {
        double drift = 0.0;
        for (double v : q) drift = std::max(drift, std::abs(v - q.front()));
        double denom = std::max(std::abs(q.front()), 1e-30);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g\n", name.c_str(),
                      q.front(), q.back(), drift, drift / denom);
        return std::string(buf);
    };
    return "quantity,initial,final,max_abs_drift,max_rel_drift\n" +
           row("mean", traj.means) + row("energy", traj.energies) +
           row("hs_norm", traj.hs_norms);
}

int cmd_simulate(const CommonArgs& args) {
    json cfg = take_keys(load_config(args), {"solver", "initial", "phi", "T", "schedule",
                                             "max_samples", "dump_snapshots", "prefix"});
    SolverConfig solver = SolverConfig::from_json(cfg.value("solver", json::object()));
    TrigPoly initial = cfg.contains("initial") ? parse_poly(cfg.at("initial")) : TrigPoly();
    TrigPoly phi = cfg.contains("phi") ? parse_poly(cfg.at("phi")) : TrigPoly();
    double t_end = cfg.value("T", 1.0);
    ControlSchedule schedule;
    if (cfg.contains("schedule")) {
        if (cfg.at("schedule").is_string()) {
            std::ifstream in(cfg.at("schedule").get<std::string>());
            if (!in) throw std::invalid_argument("cannot open schedule file");
            json sj;
            in >> sj;
            schedule = ControlSchedule::from_json(sj);
        } else {
            schedule = ControlSchedule::from_json(cfg.at("schedule"));
        }
    }
    int max_samples = cfg.value("max_samples", 256);
    std::string prefix = cfg.value("prefix", "sim");

    Trajectory traj = integrate(to_grid(initial, solver.n), phi, schedule, t_end, solver,
                                max_samples);
    write_file(args.out_dir, prefix + "_trajectory.csv", trajectory_csv(traj));
    write_file(args.out_dir, prefix + "_invariants.csv", invariants_csv(traj));
    if (cfg.value("dump_snapshots", false)) {
        auto bytes = trajectory_snapshots(traj);
        write_file(args.out_dir, prefix + "_snapshots.bin",
                   std::string(bytes.begin(), bytes.end()));
    }
    return kExitOk;
}

int cmd_saturate(const CommonArgs& args) {
    json cfg = take_keys(load_config(args), {"max_m"});
    int max_m = cfg.value("max_m", 8);
    if (max_m < 1 || max_m > 12) {
        std::cerr << "saturate: max_m must lie in [1, 12] (exact-arithmetic cap)\n";
        return kExitConfig;
    }
    auto rows = certify_basis(max_m);
    write_file(args.out_dir, "certificates.csv", certificate_csv(rows));
    for (const auto& r : rows) {
        std::cout << (r.pass ? "ok   " : "FAIL ") << r.mode << "(" << r.m << "x)"
                  << " via " << r.witness << ", leading " << r.leading.str() << "\n";
    }
    return all_pass(rows) ? kExitOk : kExitFailure;
}

int cmd_probe_limit(const CommonArgs& args) {
    json cfg = take_keys(load_config(args),
                         {"solver", "u0", "phi", "eta0", "deltas", "s", "prefix"});
    SolverConfig solver = SolverConfig::from_json(cfg.value("solver", json::object()));
    TrigPoly u0 = cfg.contains("u0") ? parse_poly(cfg.at("u0")) : TrigPoly();
    TrigPoly phi = cfg.contains("phi") ? parse_poly(cfg.at("phi")) : TrigPoly();
    TrigPoly eta0 = cfg.contains("eta0") ? parse_poly(cfg.at("eta0")) : TrigPoly();
    std::vector<double> deltas =
        cfg.value("deltas", std::vector<double>{1e-1, 3e-2, 1e-2, 3e-3, 1e-3});
    double s = cfg.value("s", 2.0);
    std::string prefix = cfg.value("prefix", "probe");

    ProbeTable table =
        asymptotic_probe(to_grid(u0, solver.n), phi, eta0, deltas, s, solver, args.jobs);
    write_file(args.out_dir, prefix + ".json", table.to_json().dump(2) + "\n");
    write_file(args.out_dir, prefix + ".csv", table.csv());
    std::cout << "limit increment: " << table.limit.str() << "\nfitted order: " << table.fitted_order
              << "\n";
    return kExitOk;
}

int cmd_steer(const CommonArgs& args) {
    json cfg = take_keys(load_config(args), {"solver", "u0", "target", "epsilon", "T",
                                             "initial_delta", "prefix"});
    SolverConfig solver = SolverConfig::from_json(cfg.value("solver", json::object()));
    TrigPoly u0 = cfg.contains("u0") ? parse_poly(cfg.at("u0")) : TrigPoly();
    if (!cfg.contains("target")) throw std::invalid_argument("steer: config needs \"target\"");
    TrigPoly target = parse_poly(cfg.at("target"));
    double eps = cfg.value("epsilon", 0.05);
    std::string prefix = cfg.value("prefix", "steer");
    SteeringOptions opts;
    opts.initial_delta = cfg.value("initial_delta", 0.1);

    ControlSchedule schedule;
    SteeringReport report;
    if (cfg.contains("T")) {
        std::tie(schedule, report) =
            synthesize_fixed_time(to_grid(u0, solver.n), target, parse_time(cfg.at("T")),
                                  eps, solver, opts);
    } else {
        std::tie(schedule, report) =
            synthesize_small_time(to_grid(u0, solver.n), target, eps, solver, opts);
    }
    write_file(args.out_dir, prefix + "_schedule.json", schedule.to_json().dump(2) + "\n");
    write_file(args.out_dir, prefix + "_report.json", report.to_json().dump(2) + "\n");
    write_file(args.out_dir, prefix + "_stages.csv", report.stages_csv());
    std::cout << "final H^s error: " << report.final_error << " (target " << eps
              << "), schedule segments: " << schedule.size()
              << ", total time: " << schedule.total_duration().to_double() << "\n";
    return report.final_error <= eps ? kExitOk : kExitFailure;
}

int cmd_verify(const CommonArgs& args) {
    auto results = run_acceptance(args.seed, args.jobs);
    std::cout << acceptance_matrix(results);
    write_file(args.out_dir, "verify.csv", acceptance_csv(results));
    return all_pass(results) ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Controlled periodic Camassa-Holm simulation and H0 steering toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    app.add_option("--config", args.config_path, "JSON config file");
    app.add_option("--out-dir", args.out_dir, "output directory (all files land here)");
    app.add_option("--set", args.sets, "KEY=VALUE config override (repeatable)");
    app.add_option("--seed", args.seed, "seed for randomized checks");
    app.add_option("--jobs", args.jobs, "parallel solver runs for probes");

    auto* sim = app.add_subcommand("simulate", "integrate and export trajectory CSVs");
    auto* sat = app.add_subcommand("saturate", "emit exact saturation certificates");
    auto* probe = app.add_subcommand("probe-limit", "run the scaled-limit probe");
    auto* steer = app.add_subcommand("steer", "synthesize and verify a steering schedule");
    auto* verify = app.add_subcommand("verify", "run the full verification matrix");
    for (auto* sub : {sim, sat, probe, steer, verify}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(args);
        if (sat->parsed()) return cmd_saturate(args);
        if (probe->parsed()) return cmd_probe_limit(args);
        if (steer->parsed()) return cmd_steer(args);
        if (verify->parsed()) return cmd_verify(args);
    } catch (const BlowUpError& e) {
        std::cerr << "blow-up: " << e.what() << "\n";
        return kExitBlowUp;
    } catch (const StageFailureError& e) {
        std::cerr << "steering failure: " << e.what() << "\n";
        return kExitFailure;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
