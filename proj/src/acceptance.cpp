// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#include "chsteer/acceptance.hpp"

#include "chsteer/saturation.hpp"
#include "chsteer/solver.hpp"
#include "chsteer/steering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace chsteer {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

TrigPoly random_poly(std::mt19937_64& rng, int max_degree) {
    std::uniform_int_distribution<int> num(-20, 20);
    std::uniform_int_distribution<int> den(1, 12);
    std::uniform_int_distribution<int> pick(0, 2);
    TrigPoly p;
    p.set_const(Rational(num(rng), den(rng)));
    for (int k = 1; k <= max_degree; ++k) {
        if (pick(rng) != 0) p.add_cos(k, Rational(num(rng), den(rng)));
        if (pick(rng) != 0) p.add_sin(k, Rational(num(rng), den(rng)));
    }
    return p;
}

CriterionResult c1_exact_certificates() {
    TrigPoly sinx = TrigPoly::sine(1);
    TrigPoly mix = TrigPoly::sine(1) + TrigPoly::cosine(1);
    bool ok_sin = drift(sinx) == TrigPoly::sine(2, Rational(-3, 5));
    bool ok_cos =
        f_image(TrigPoly(), std::span(&mix, 1)) == TrigPoly::cosine(2, Rational(-6, 5));
    return {1, "exact saturation certificates (-3/5 sin 2x, -6/5 cos 2x)", ok_sin && ok_cos,
            ok_sin && ok_cos ? "both identities hold exactly" : "exact equality failed"};
}

CriterionResult c2_gadget_oracle() {
    int checked = 0;
    for (int m = 2; m <= 10; ++m) {
        for (int a = -2; a <= 2; ++a) {
            for (int b = -2; b <= 2; ++b) {
                auto phis = gadget(m, Rational(a), Rational(b));
                TrigPoly expanded = f_image(TrigPoly(), std::span<const TrigPoly>(phis));
                if (expanded != gadget_image(m, Rational(a), Rational(b)))
                    return {2, "gadget oracle equivalence", false,
                            "mismatch at m=" + std::to_string(m) + " alpha=" + std::to_string(a) +
                                " beta=" + std::to_string(b)};
                ++checked;
            }
        }
    }
    return {2, "gadget oracle equivalence (m <= 10, alpha,beta in {-2..2})", true,
            std::to_string(checked) + " exact equalities"};
}

CriterionResult c3_basis_membership() {
    auto rows = certify_basis(8);
    bool ok = all_pass(rows);
    return {3, "basis membership certify_basis(8)", ok,
            std::to_string(rows.size()) + " rows, " + (ok ? "all exact" : "mismatch")};
}

CriterionResult c4_planner_soundness(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 100; ++i) {
        TrigPoly target = random_poly(rng, 6);
        MovePlan plan = decompose(target);
        if (!plan.residual.is_zero())
            return {4, "planner soundness", false, "nonzero residual at sample " + std::to_string(i)};
        TrigPoly realized = plan.root ? realized_value(*plan.root) : TrigPoly();
        if (realized != target)
            return {4, "planner soundness", false, "re-expansion mismatch at sample " + std::to_string(i)};
    }
    return {4, "planner soundness (100 random targets, degree <= 6)", true,
            "residual exactly zero under bottom-up re-evaluation"};
}

CriterionResult c5_conservation() {
    SolverConfig cfg;
    cfg.n = 256;
    cfg.kappa = 0.5;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-13;
    cfg.dt_max = 0.05;
    GridField u0 = to_grid(TrigPoly::sine(1, Rational(1, 10)), cfg.n);
    Trajectory traj = integrate(u0, TrigPoly(), ControlSchedule{}, 1.0, cfg, 128);
    // mean(u0) = 0, so mean drift is normalized by the mean of a
    // comparable-amplitude field, 2*pi*||u0||_{L2}; energy drift by E(0).
    double mean_scale = 2.0 * std::numbers::pi * hs_norm(u0, 0.0);
    double e0 = traj.energies.front();
    double dmean = 0.0, denergy = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        dmean = std::max(dmean, std::abs(traj.means[i] - traj.means.front()));
        denergy = std::max(denergy, std::abs(traj.energies[i] - e0));
    }
    double rel_mean = dmean / mean_scale;
    double rel_energy = denergy / e0;
    bool ok = rel_mean < 1e-10 && rel_energy < 1e-8;
    return {5, "solver conservation (mean < 1e-10, energy < 1e-8)", ok,
            "mean drift " + fmt(rel_mean) + ", energy drift " + fmt(rel_energy)};
}

TrigPoly random_small_poly(std::mt19937_64& rng, int max_degree, double norm_cap) {
    TrigPoly p = random_poly(rng, max_degree);
    double n = p.hs_norm(2.0);
    if (n == 0.0) return p;
    auto scale = rationalize(norm_cap / n, 1'000'000).value;
    return p.scaled(scale);
}

CriterionResult c6_shift_and_concat(std::uint64_t seed, int jobs) {
    (void)jobs;
    SolverConfig cfg;
    cfg.n = 128;
    cfg.rtol = 1e-9;
    cfg.atol = 1e-12;
    cfg.dt_max = 0.05;
    std::mt19937_64 rng(seed + 1);
    double worst_shift = 0.0, worst_concat = 0.0;
    for (int i = 0; i < 20; ++i) {
        TrigPoly u0p = random_small_poly(rng, 3, 0.2);
        TrigPoly phip = random_small_poly(rng, 3, 0.2);
        TrigPoly etap = random_small_poly(rng, 3, 0.3);
        GridField u0 = to_grid(u0p, cfg.n);
        GridField phi = to_grid(phip, cfg.n);
        GridField eta = to_grid(etap, cfg.n);
        const double t = 0.25;
        GridField shifted = resolvent(u0, phi, eta, t, cfg);
        GridField unshifted = resolvent(u0 + phi, GridField::zeros(cfg.n), eta, t, cfg);
        double disc = hs_norm(shifted - (unshifted - phi), cfg.s_monitor);
        double tol = 10.0 * (cfg.rtol * std::max(1.0, hs_norm(shifted, cfg.s_monitor)) + cfg.atol);
        worst_shift = std::max(worst_shift, disc / tol);
    }
    std::uniform_real_distribution<double> dur(0.05, 0.3);
    std::uniform_real_distribution<double> amp(-0.5, 0.5);
    for (int i = 0; i < 20; ++i) {
        GridField u0 = to_grid(random_small_poly(rng, 3, 0.2), cfg.n);
        H0Value e1{amp(rng), amp(rng), amp(rng)};
        H0Value e2{amp(rng), amp(rng), amp(rng)};
        H0Value e3{amp(rng), amp(rng), amp(rng)};
        double disc = concat_check(u0, e1, e2, e3, dur(rng), dur(rng), dur(rng), cfg);
        double tol = 10.0 * (cfg.rtol + cfg.atol);
        worst_concat = std::max(worst_concat, disc / tol);
    }
    bool ok = worst_shift <= 1.0 && worst_concat <= 1.0;
    return {6, "shift identity and concatenation (20 randomized cases each)", ok,
            "worst shift " + fmt(worst_shift) + "x tol, worst concat " + fmt(worst_concat) +
                "x tol"};
}

CriterionResult c7_asymptotic(int jobs) {
    SolverConfig cfg;
    cfg.n = 128;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-13;
    cfg.dt_max = 0.02;
    GridField u0 = to_grid(TrigPoly::cosine(1, Rational(1, 5)), cfg.n);
    std::vector<double> deltas{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    ProbeTable table =
        asymptotic_probe(u0, TrigPoly::sine(1), TrigPoly(), deltas, 2.0, cfg, jobs);
    bool monotone = true;
    for (std::size_t i = 1; i < table.rows.size(); ++i)
        if (!(table.rows[i].error < table.rows[i - 1].error)) monotone = false;
    bool small = table.rows.back().error < 1e-2;
    bool order_ok = table.fitted_order >= 0.25;
    std::ostringstream os;
    os << "errors";
    for (const auto& r : table.rows) os << " " << fmt(r.error);
    os << ", order " << fmt(table.fitted_order);
    return {7, "asymptotic limit probe (monotone, < 1e-2, order >= 0.25)",
            monotone && small && order_ok, os.str()};
}

SolverConfig steering_config() {
    SolverConfig cfg;
    cfg.n = 64;
    cfg.rtol = 1e-8;
    cfg.atol = 1e-11;
    cfg.dt_max = 0.05;
    cfg.blowup_cap = 1e4;
    return cfg;
}

TrigPoly steering_target() {
    return TrigPoly::sine(2, Rational(1, 10)) + TrigPoly::cosine(1, Rational(1, 20));
}

CriterionResult c8_small_time() {
    SolverConfig cfg = steering_config();
    GridField u0 = GridField::zeros(cfg.n);
    try {
        auto [sched, report] = synthesize_small_time(u0, steering_target(), 0.05, cfg);
        bool finite = true;
        for (const auto& seg : sched.segments())
            finite = finite && std::isfinite(seg.value.c_const) &&
                     std::isfinite(seg.value.c_cos) && std::isfinite(seg.value.c_sin);
        bool ok = report.final_error <= 0.05 && !sched.empty() && finite;
        return {8, "small-time steering to 0.1 sin 2x + 0.05 cos x (eps = 0.05)", ok,
                "final H^2 error " + fmt(report.final_error) + ", " +
                    std::to_string(sched.size()) + " H0 segments, time " +
                    fmt(sched.total_duration().to_double())};
    } catch (const std::exception& e) {
        return {8, "small-time steering", false, e.what()};
    }
}

CriterionResult c9_fixed_time() {
    SolverConfig cfg = steering_config();
    GridField u0 = GridField::zeros(cfg.n);
    try {
        auto [sched, report] =
            synthesize_fixed_time(u0, steering_target(), Rational(1), 0.05, cfg);
        bool exact_total = sched.total_duration() == Rational(1);
        bool ok = report.final_error <= 0.05 && exact_total && report.loiter_segments >= 1;
        return {9, "fixed-time steering (T = 1, loiter present, exact duration)", ok,
                "final H^2 error " + fmt(report.final_error) + ", duration " +
                    sched.total_duration().str() + ", " +
                    std::to_string(report.loiter_segments) + " loiter segment(s)"};
    } catch (const std::exception& e) {
        return {9, "fixed-time steering", false, e.what()};
    }
}

CriterionResult c10_stability() {
    SolverConfig cfg;
    cfg.n = 128;
    cfg.rtol = 1e-9;
    cfg.atol = 1e-12;
    GridField u0 = to_grid(TrigPoly::sine(1, Rational(1, 10)), cfg.n);
    auto rows = stability_probe(u0, {1e-2, 1e-3, 1e-4, 1e-5}, 0.5, cfg);
    double lo = rows.front().ratio, hi = rows.front().ratio;
    for (const auto& r : rows) {
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
    }
    bool ok = hi / lo < 2.0;
    return {10, "stability probe (Lipschitz ratios within factor 2)", ok,
            "ratios in [" + fmt(lo) + ", " + fmt(hi) + "]"};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::uint64_t seed, int jobs, int only_id) {
    std::vector<CriterionResult> out;
    auto want = [&](int id) { return only_id == 0 || only_id == id; };
    if (want(1)) out.push_back(c1_exact_certificates());
    if (want(2)) out.push_back(c2_gadget_oracle());
    if (want(3)) out.push_back(c3_basis_membership());
    if (want(4)) out.push_back(c4_planner_soundness(seed));
    if (want(5)) out.push_back(c5_conservation());
    if (want(6)) out.push_back(c6_shift_and_concat(seed, jobs));
    if (want(7)) out.push_back(c7_asymptotic(jobs));
    if (want(8)) out.push_back(c8_small_time());
    if (want(9)) out.push_back(c9_fixed_time());
    if (want(10)) out.push_back(c10_stability());
    return out;
}

std::string acceptance_matrix(const std::vector<CriterionResult>& results) {
    std::string out;
    for (const auto& r : results) {
        out += (r.pass ? "PASS" : "FAIL");
        out += " criterion " + std::to_string(r.id) + ": " + r.name + " [" + r.detail + "]\n";
    }
    return out;
}

bool all_pass(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

std::string acceptance_csv(const std::vector<CriterionResult>& results) {
    std::string out = "criterion,name,pass,detail\n";
    for (const auto& r : results) {
        out += std::to_string(r.id) + ",\"" + r.name + "\"," + (r.pass ? "1" : "0") + ",\"" +
               r.detail + "\"\n";
    }
    return out;
}

}  // namespace chsteer
