// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#include "chsteer/steering.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

namespace chsteer {

TrigPoly limit_target(const TrigPoly& u0, const TrigPoly& phi, const TrigPoly& eta0) {
    return u0 + drift(phi) + eta0.helmholtz_inv();
}

ControlSchedule step1_schedule(const TrigPoly& increment, const Rational& t) {
    if (increment.degree() > 1)
        throw std::invalid_argument("step1_schedule: increment must lie in H0");
    if (t.sign() <= 0) throw std::invalid_argument("step1_schedule: duration must be positive");
    ControlSchedule sched;
    sched.append(t, H0Value::from_poly(increment.helmholtz().scaled(t.reciprocal())));
    return sched;
}

StageFailureError::StageFailureError(std::string stage_, double best_error_, double budget_)
    : std::runtime_error("steering stage \"" + stage_ + "\" missed its budget (best " +
                         std::to_string(best_error_) + " vs " + std::to_string(budget_) + ")"),
      stage(std::move(stage_)), best_error(best_error_), budget(budget_) {}

namespace {

constexpr int kMaxDepth = 6;

GridField run_schedule(const GridField& state, const ControlSchedule& piece,
                       const SolverConfig& cfg) {
    if (piece.empty()) return state;
    return integrate(state, TrigPoly(), piece, -1.0, cfg, 1).final_state();
}

struct StagePiece {
    ControlSchedule schedule;
    GridField end_state;
    std::vector<StageRecord> records;  // nested records included, outermost last
};

StagePiece synthesize_increment(const GridField& state, const TrigPoly& increment,
                                double budget, double delta0, const SolverConfig& cfg,
                                const SteeringOptions& opts, int depth);

/// One elementary stage: realize drift(psi) + eta from `state`, halving the
/// nominal delta until the measured error meets the budget.
StagePiece steer_stage(const GridField& state, const TrigPoly& psi, const TrigPoly& eta,
                       double budget, double delta0, const SolverConfig& cfg,
                       const SteeringOptions& opts, int depth) {
    if (depth > kMaxDepth)
        throw StageFailureError("recursion depth limit", std::numeric_limits<double>::infinity(),
                                budget);
    TrigPoly increment = drift(psi) + eta;
    GridField ideal = state + to_grid(increment, cfg.n);
    // Integration accuracy bounds what any stage can verifiably achieve.
    const double noise_floor = 1e3 * cfg.rtol + 10.0 * cfg.atol;
    budget = std::max(budget, noise_floor);

    StageRecord rec;
    {
        // Exact coefficients can be long rationals; keep logs readable.
        auto compact = [](const TrigPoly& p) {
            std::string s = p.str();
            if (s.size() <= 48) return s;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "(degree %d, |.|_2 = %.3g)", p.degree(),
                          p.hs_norm(2.0));
            return std::string(buf);
        };
        std::ostringstream os;
        if (!psi.is_zero()) os << "phi = " << compact(psi);
        if (!eta.is_zero()) os << (psi.is_zero() ? "" : ", ") << "eta = " << compact(eta);
        if (psi.is_zero() && eta.is_zero()) os << "no-op";
        rec.description = os.str();
    }

    if (psi.is_zero() && eta.is_zero()) {
        StagePiece out{ControlSchedule{}, state, {}};
        out.records.push_back(rec);
        return out;
    }

    StagePiece best;
    double best_err = std::numeric_limits<double>::infinity();
    double best_delta = delta0;

    // The stage error behaves like C(psi) sqrt(delta) + R delta, where C is
    // of the order of 1.5(|psi|^3 + 0.2|psi|) in H^s and R is the free drift
    // rate of the base state (the move rides on top of whatever the state is
    // doing). Seed the halving loop near the predicted budget crossing
    // instead of burning halvings from the top, but never start inside the
    // blow-up region r |psi| ~ cap.
    double start_delta = delta0;
    if (!psi.is_zero() && psi.degree() <= 1 && budget < 1.0) {
        double pn = psi.hs_norm(cfg.s_monitor);
        double c_est = 1.5 * (pn * pn * pn + 0.2 * pn);
        double rate = hs_norm(rhs(state, GridField::zeros(cfg.n), GridField::zeros(cfg.n), cfg),
                              cfg.s_monitor);
        // solve C sqrt(d) + R d = budget/2 for d (cancellation-free form)
        double C = std::max(c_est, 1e-12), R = std::max(rate, 0.0);
        double sq = budget / (C + std::sqrt(C * C + 2.0 * R * budget));
        double sweet = 4.0 * sq * sq;
        double blow_floor = std::pow(3.0 * pn / cfg.blowup_cap, 2.0);
        start_delta = std::min(delta0, std::max(sweet, blow_floor));
    }

    for (int halving = 0; halving <= opts.max_halvings; ++halving) {
        const double delta_nominal = start_delta / static_cast<double>(1 << halving);
        StagePiece trial;
        trial.end_state = state;
        double err = std::numeric_limits<double>::infinity();
        try {
            Rational delta_exact;
            TrigPoly big;  // r * psi with delta = 1/r^2 exactly
            if (!psi.is_zero()) {
                Rational r = rationalize(1.0 / std::sqrt(delta_nominal),
                                                   opts.denominator_cap)
                                 .value;
                if (r.sign() <= 0) throw std::logic_error("steer_stage: bad scaling factor");
                delta_exact = (r * r).reciprocal();
                big = psi.scaled(r);

                // Phase A: fast climb to state + r*psi (duration delta^2, so
                // the quadratic transients contribute O(delta)).
                if (psi.degree() <= 1) {
                    Rational t_a = delta_exact * delta_exact;
                    ControlSchedule a = step1_schedule(big, t_a);
                    trial.end_state = run_schedule(trial.end_state, a, cfg);
                    trial.schedule.append(a);
                } else {
                    StagePiece a = synthesize_increment(trial.end_state, big,
                                                        std::max(0.4 * budget, noise_floor),
                                                        delta0, cfg, opts, depth + 1);
                    trial.end_state = a.end_state;
                    trial.schedule.append(a.schedule);
                    trial.records.insert(trial.records.end(), a.records.begin(),
                                         a.records.end());
                }
            } else {
                delta_exact = Rational::from_double_exact(delta_nominal);
            }

            // Phase B: hold at the shifted state for the full duration delta.
            // Since delta * r^2 = 1 exactly, the quadratic terms integrate to
            // drift(psi); the constant control contributes Lambda^{-2} of its
            // time integral, i.e. eta. The shift's H0 part also feels the
            // linear dispersion -2 kappa Lambda^{-2} d_x over the hold, a
            // known drift whose cancellation 2 kappa d_x (r psi) is itself an
            // H0 value, so it rides in the same constant.
            {
                TrigPoly comp = big.low_pass(1).diff().scaled(
                    Rational::from_double_exact(2.0 * cfg.kappa));
                ControlSchedule b;
                b.append(delta_exact,
                         H0Value::from_poly(
                             eta.helmholtz().scaled(delta_exact.reciprocal()) + comp));
                trial.end_state = run_schedule(trial.end_state, b, cfg);
                trial.schedule.append(b);
            }

            // Phase C: descend to the stage target.
            if (!big.is_zero()) {
                TrigPoly descent;
                if (depth == 0) {
                    // Closed loop at the top level: the descent increment is
                    // measured off the grid, so it also corrects the climb
                    // error and the hold's unmodeled deviations (the controls
                    // stay piecewise-constant H0). Modes jointly below a
                    // slice of the budget are left to the final measurement.
                    int cap = std::min(cfg.n / 2 - 1, std::max(1, big.degree()));
                    GridField gap = ideal - trial.end_state;
                    descent = from_grid(gap, cap, opts.denominator_cap).poly;
                    double spare_sq = 0.0;
                    const double spare_cap = 0.1 * budget;
                    for (int kf = descent.degree(); kf >= 2; --kf) {
                        TrigPoly single;
                        single.add_cos(kf, descent.cos_coeff(kf));
                        single.add_sin(kf, descent.sin_coeff(kf));
                        double nn = single.hs_norm(cfg.s_monitor);
                        if (std::sqrt(spare_sq + nn * nn) > spare_cap) continue;
                        spare_sq += nn * nn;
                        descent -= single;
                    }
                } else {
                    // Open loop deeper down, with the known dispersion
                    // deviation of the non-H0 shift part folded in.
                    TrigPoly hold_dev = big.high_pass(1).diff().helmholtz_inv().scaled(
                        -(Rational::from_double_exact(2.0 * cfg.kappa) * delta_exact));
                    descent = -big - hold_dev;
                }
                if (descent.degree() <= 1) {
                    Rational t_c = delta_exact * delta_exact;
                    ControlSchedule c = step1_schedule(descent, t_c);
                    trial.end_state = run_schedule(trial.end_state, c, cfg);
                    trial.schedule.append(c);
                } else {
                    StagePiece c = synthesize_increment(trial.end_state, descent,
                                                        std::max(0.4 * budget, noise_floor),
                                                        delta0, cfg, opts, depth + 1);
                    trial.end_state = c.end_state;
                    trial.schedule.append(c.schedule);
                    trial.records.insert(trial.records.end(), c.records.begin(),
                                         c.records.end());
                }
            }

            err = hs_norm(trial.end_state - ideal, cfg.s_monitor);
        } catch (const BlowUpError&) {
            err = std::numeric_limits<double>::infinity();
        } catch (const StepFailureError&) {
            err = std::numeric_limits<double>::infinity();
        } catch (const StageFailureError&) {
            // A recursive phase missed its share; retry the whole attempt at
            // a smaller delta.
            err = std::numeric_limits<double>::infinity();
        }
        rec.halving_trace.emplace_back(delta_nominal, err);
        if (err < best_err) {
            best_err = err;
            best = std::move(trial);
            best_delta = delta_nominal;
        }
        if (best_err <= budget) break;
    }

    if (best_err > budget) throw StageFailureError(rec.description, best_err, budget);
    rec.delta = best_delta;
    rec.stage_error = best_err;
    best.records.push_back(rec);
    return best;
}

/// Runs every phi stage of a node in sequence (eta rides in the last stage),
/// measuring pre/post distances to the node's own target. 75% of the budget
/// is split across the stages in proportion to each stage's H^s size, so a
/// stage that realizes a microscopic increment gets the matching microscopic
/// share; 25% stays as slack for cross-stage accumulation.
StagePiece execute_node(const GridField& state, const MoveNode& node, double delta0,
                        double budget, const SolverConfig& cfg, const SteeringOptions& opts,
                        int depth) {
    GridField target = state + to_grid(realized_value(node), cfg.n);
    StagePiece out;
    out.end_state = state;

    const std::size_t k = node.phis.size();
    auto run_one = [&](const TrigPoly& psi, const TrigPoly& eta, double stage_budget) {
        double pre = hs_norm(out.end_state - target, cfg.s_monitor);
        StagePiece piece =
            steer_stage(out.end_state, psi, eta, stage_budget, delta0, cfg, opts, depth);
        out.end_state = piece.end_state;
        out.schedule.append(piece.schedule);
        piece.records.back().pre_error = pre;
        piece.records.back().post_error = hs_norm(out.end_state - target, cfg.s_monitor);
        out.records.insert(out.records.end(), piece.records.begin(), piece.records.end());
    };

    if (k == 0) {
        if (!node.eta.is_zero()) run_one(TrigPoly(), node.eta, 0.75 * budget);
        return out;
    }
    std::vector<TrigPoly> psis;
    std::vector<double> weights;
    std::vector<bool> skip;
    double total_weight = 0.0, max_weight = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        psis.push_back(child_realized(node.phis[i]));
        double w = psis.back().hs_norm(cfg.s_monitor);
        if (psis.back().degree() > 1) w *= 4.0;  // recursive phases are costlier
        double inc = (drift(psis[i]) + ((i + 1 == k) ? node.eta : TrigPoly()))
                         .hs_norm(cfg.s_monitor);
        if (i + 1 == k) w += node.eta.hs_norm(cfg.s_monitor);
        // A stage whose increment is below double noise would only pick up
        // the base state's free drift during its hold; skip it.
        skip.push_back(inc < 1e-12 + 1e-6 * budget);
        weights.push_back(w);
        if (!skip.back()) max_weight = std::max(max_weight, w);
    }
    for (double& w : weights) {
        w = std::max(w, 1e-3 * max_weight);
        total_weight += w;
    }
    const double noise_floor = 1e3 * cfg.rtol + 10.0 * cfg.atol;
    for (std::size_t i = 0; i < k; ++i) {
        if (skip[i]) continue;
        TrigPoly eta = (i + 1 == k) ? node.eta : TrigPoly();
        run_one(psis[i], eta,
                std::max(0.75 * budget * weights[i] / total_weight, noise_floor));
    }
    return out;
}

StagePiece synthesize_increment(const GridField& state, const TrigPoly& increment,
                                double budget, double delta0, const SolverConfig& cfg,
                                const SteeringOptions& opts, int depth) {
    if (increment.is_zero()) return {ControlSchedule{}, state, {}};
    MovePlan plan = decompose(increment);
    return execute_node(state, *plan.root, delta0, budget, cfg, opts, depth);
}

double fit_order(const std::vector<ProbeRow>& rows) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& r : rows) {
        if (!std::isfinite(r.error) || r.error <= 0) continue;
        double x = std::log(r.delta);
        double y = std::log(r.error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) return 0.0;
    double denom = m * sxx - sx * sx;
    return denom == 0 ? 0.0 : (m * sxy - sx * sy) / denom;
}

/// Runs fn(i) for i in [0, count) on up to `jobs` threads; exceptions other
/// than per-row handled ones propagate after join.
template <typename Fn>
void parallel_rows(int count, int jobs, Fn&& fn) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

MoveResult elementary_move(const GridField& state, const MoveNode& node, double delta0,
                           double budget, const SolverConfig& cfg,
                           const SteeringOptions& opts) {
    cfg.validate();
    StagePiece piece = execute_node(state, node, delta0, budget, cfg, opts, 0);
    GridField target = state + to_grid(realized_value(node), cfg.n);
    MoveResult out;
    out.schedule = std::move(piece.schedule);
    out.end_state = std::move(piece.end_state);
    out.achieved_error = hs_norm(out.end_state - target, cfg.s_monitor);
    out.stages = std::move(piece.records);
    return out;
}

std::pair<ControlSchedule, SteeringReport> synthesize_small_time(
    const GridField& u0, const TrigPoly& target, double eps, const SolverConfig& cfg,
    const SteeringOptions& opts) {
    cfg.validate();
    if (eps <= 0) throw std::invalid_argument("synthesize_small_time: eps must be positive");

    SteeringReport report;
    report.target = target;

    int deg_cap = opts.from_grid_degree > 0 ? opts.from_grid_degree
                                            : std::max(target.degree(), 8);
    deg_cap = std::min(deg_cap, cfg.n / 2 - 1);
    FromGridResult start = from_grid(u0, deg_cap, opts.denominator_cap);
    report.rationalization_error = start.rationalization_error;
    TrigPoly increment = target - start.poly;

    // Jointly negligible modes ride on the eps slack instead of spending
    // moves: modes are H^s-orthogonal, so dropping a set of per-mode norms
    // {n_k} costs exactly sqrt(sum n_k^2). Allow up to 0.4 eps for this;
    // the stages get 0.5 eps (2/3 of eps at the executor's 75% share) and
    // 0.1 eps stays as slack.
    {
        struct ModeNorm {
            int k;
            double norm;
        };
        std::vector<ModeNorm> norms;
        for (const auto& [k, mode] : increment.modes()) {
            TrigPoly single;
            single.add_cos(k, mode.cos_coeff);
            single.add_sin(k, mode.sin_coeff);
            norms.push_back({k, single.hs_norm(cfg.s_monitor)});
        }
        norms.push_back({0, TrigPoly(increment.const_term()).hs_norm(cfg.s_monitor)});
        std::sort(norms.begin(), norms.end(),
                  [](const ModeNorm& a, const ModeNorm& b) { return a.norm < b.norm; });
        double cap = 0.4 * eps;
        double dropped_sq = 0.0;
        for (const auto& mn : norms) {
            if (std::sqrt(dropped_sq + mn.norm * mn.norm) > cap) break;
            dropped_sq += mn.norm * mn.norm;
            if (mn.k == 0) {
                increment.set_const(Rational(0));
            } else {
                increment.add_cos(mn.k, -increment.cos_coeff(mn.k));
                increment.add_sin(mn.k, -increment.sin_coeff(mn.k));
            }
        }
    }

    GridField target_grid = to_grid(target, cfg.n);
    if (increment.is_zero()) {
        report.final_error = hs_norm(u0 - target_grid, cfg.s_monitor);
        return {ControlSchedule{}, report};
    }

    MovePlan plan = decompose(increment);
    double delta0 = opts.initial_delta;
    if (opts.time_cap > 0) {
        PlanStats st = plan_stats(plan);
        delta0 = std::min(delta0, opts.time_cap / (2.0 * (st.move_count + 1)));
    }

    try {
        StagePiece piece = execute_node(u0, *plan.root, delta0, eps * (2.0 / 3.0), cfg, opts, 0);
        report.stages = piece.records;
        report.final_error = hs_norm(piece.end_state - target_grid, cfg.s_monitor);
        report.total_time = piece.schedule.total_duration();
        return {std::move(piece.schedule), report};
    } catch (StageFailureError& fail) {
        fail.partial_report = report;
        throw;
    }
}

namespace {

struct LoiterResult {
    Rational tau;  // exact; <= horizon
    bool filled_horizon;
};

/// Largest loiter time (by dyadic bisection on the free trajectory) whose
/// free drift stays below the trigger.
LoiterResult find_loiter(const GridField& state, const Rational& horizon, double trigger,
                         const SolverConfig& cfg) {
    const double h = horizon.to_double();
    Trajectory traj = integrate(state, TrigPoly(), ControlSchedule{}, h, cfg, 64);
    double max_drift = 0.0;
    for (const auto& snap : traj.states)
        max_drift = std::max(max_drift, hs_norm(snap - traj.states.front(), cfg.s_monitor));
    if (max_drift < trigger) return {horizon, true};

    // Bisection on the dyadic fraction of the horizon.
    Rational lo(0), hi(1);
    for (int iter = 0; iter < 12; ++iter) {
        Rational mid = (lo + hi) * Rational(1, 2);
        GridField probe = resolvent(state, GridField::zeros(cfg.n),
                                    GridField::zeros(cfg.n), (horizon * mid).to_double(), cfg);
        double d = hs_norm(probe - state, cfg.s_monitor);
        if (d < trigger) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {horizon * lo, false};
}

}  // namespace

std::pair<ControlSchedule, SteeringReport> synthesize_fixed_time(
    const GridField& u0, const TrigPoly& target, const Rational& T, double eps,
    const SolverConfig& cfg, const SteeringOptions& opts) {
    cfg.validate();
    if (T.sign() <= 0) throw std::invalid_argument("synthesize_fixed_time: T must be positive");
    if (eps <= 0) throw std::invalid_argument("synthesize_fixed_time: eps must be positive");

    SteeringReport report;
    report.target = target;
    GridField target_grid = to_grid(target, cfg.n);
    GridField state = u0;
    ControlSchedule schedule;
    Rational used(0);
    const int max_rounds = 64;

    for (int round = 0; round < max_rounds; ++round) {
        Rational remaining = T - used;
        if (remaining.sign() <= 0) break;

        double err_now = hs_norm(state - target_grid, cfg.s_monitor);
        if (err_now > 0.375 * eps) {
            SteeringOptions steer_opts = opts;
            steer_opts.time_cap = (remaining * Rational(1, 2)).to_double();
            SteeringReport stage_report;
            ControlSchedule piece;
            try {
                std::tie(piece, stage_report) =
                    synthesize_small_time(state, target, 0.9 * eps, cfg, steer_opts);
            } catch (StageFailureError& fail) {
                fail.partial_report.stages.insert(fail.partial_report.stages.begin(),
                                                  report.stages.begin(), report.stages.end());
                throw;
            }
            state = run_schedule(state, piece, cfg);
            schedule.append(piece);
            used += piece.total_duration();
            report.stages.insert(report.stages.end(), stage_report.stages.begin(),
                                 stage_report.stages.end());
            report.rationalization_error =
                std::max(report.rationalization_error, stage_report.rationalization_error);
            remaining = T - used;
            if (remaining.sign() <= 0) break;
        }

        // Loiter while the free drift stays under the room left between the
        // achieved error and eps.
        double err_steered = hs_norm(state - target_grid, cfg.s_monitor);
        double trigger = std::clamp(0.9 * (eps - err_steered), 0.05 * eps, 0.45 * eps);
        LoiterResult loiter = find_loiter(state, remaining, trigger, cfg);
        if (loiter.tau.sign() > 0) {
            H0Value zero;
            schedule.append(loiter.tau, zero);
            state = resolvent(state, GridField::zeros(cfg.n), GridField::zeros(cfg.n),
                              loiter.tau.to_double(), cfg);
            used += loiter.tau;
            ++report.loiter_segments;
            StageRecord rec;
            rec.description = "loiter";
            rec.delta = loiter.tau.to_double();
            rec.pre_error = err_now;
            rec.post_error = hs_norm(state - target_grid, cfg.s_monitor);
            report.stages.push_back(rec);
        }
        if (loiter.tau < Rational::from_double_exact(std::min(cfg.dt_max, 1e-3)))
            report.loiter_collapse = true;
        if (loiter.filled_horizon) break;
    }

    if (used != T)
        throw StageFailureError("fixed-time loop did not fill the horizon",
                                hs_norm(state - target_grid, cfg.s_monitor), eps);
    report.final_error = hs_norm(state - target_grid, cfg.s_monitor);
    report.total_time = used;
    return {std::move(schedule), report};
}

ProbeTable asymptotic_probe(const GridField& u0, const TrigPoly& phi, const TrigPoly& eta0,
                            const std::vector<double>& deltas, double s,
                            const SolverConfig& cfg, int jobs) {
    cfg.validate();
    for (std::size_t i = 1; i < deltas.size(); ++i)
        if (!(deltas[i] < deltas[i - 1]))
            throw std::invalid_argument("asymptotic_probe: deltas must be strictly decreasing");

    ProbeTable table;
    table.limit = drift(phi) + eta0.helmholtz_inv();
    GridField limit_grid = u0 + to_grid(table.limit, cfg.n);
    GridField phi_grid = to_grid(phi, cfg.n);
    GridField eta_grid = to_grid(eta0, cfg.n);
    table.rows.resize(deltas.size());

    parallel_rows(static_cast<int>(deltas.size()), jobs, [&](int i) {
        const double d = deltas[i];
        ProbeRow row{d, std::numeric_limits<double>::infinity(), false};
        try {
            GridField end = resolvent(u0, scaled(phi_grid, 1.0 / std::sqrt(d)),
                                      scaled(eta_grid, 1.0 / d), d, cfg);
            row.error = hs_norm(end - limit_grid, s);
        } catch (const BlowUpError&) {
            row.blew_up = true;
        }
        table.rows[i] = row;
    });
    table.fitted_order = fit_order(table.rows);
    return table;
}

std::vector<StabilityRow> stability_probe(const GridField& u0,
                                          const std::vector<double>& sizes, double t,
                                          const SolverConfig& cfg) {
    cfg.validate();
    TrigPoly dir_poly = TrigPoly::cosine(1);
    GridField dir = to_grid(dir_poly, cfg.n);
    dir = scaled(dir, 1.0 / dir_poly.hs_norm(cfg.s_monitor));
    GridField base = resolvent(u0, GridField::zeros(cfg.n), GridField::zeros(cfg.n), t, cfg);
    std::vector<StabilityRow> rows;
    for (double h : sizes) {
        if (h == 0.0) continue;  // ratio undefined
        GridField moved = resolvent(u0 + scaled(dir, h), GridField::zeros(cfg.n),
                                    GridField::zeros(cfg.n), t, cfg);
        rows.push_back({h, hs_norm(moved - base, cfg.s_monitor) / h});
    }
    return rows;
}

double concat_check(const GridField& u0, const H0Value& eta1, const H0Value& eta2,
                    const H0Value& eta3, double t1, double t2, double t3,
                    const SolverConfig& cfg) {
    if (t1 <= 0 || t2 <= 0 || t3 <= 0)
        throw std::invalid_argument("concat_check: durations must be positive");
    ControlSchedule sched;
    sched.append(Rational::from_double_exact(t1), eta1);
    sched.append(Rational::from_double_exact(t2), eta2);
    sched.append(Rational::from_double_exact(t3), eta3);
    GridField one_shot = integrate(u0, TrigPoly(), sched, -1.0, cfg, 1).final_state();

    GridField s1 = resolvent(u0, GridField::zeros(cfg.n), to_grid(eta1.to_poly(), cfg.n), t1, cfg);
    GridField s2 = resolvent(s1, GridField::zeros(cfg.n), to_grid(eta2.to_poly(), cfg.n), t2, cfg);
    GridField s3 = resolvent(s2, GridField::zeros(cfg.n), to_grid(eta3.to_poly(), cfg.n), t3, cfg);
    return hs_norm(one_shot - s3, cfg.s_monitor);
}

nlohmann::json SteeringReport::to_json() const {
    nlohmann::json stages_j = nlohmann::json::array();
    for (const auto& st : stages) {
        nlohmann::json trace = nlohmann::json::array();
        for (const auto& [d, e] : st.halving_trace) trace.push_back({{"delta", d}, {"error", e}});
        stages_j.push_back({{"description", st.description},
                            {"delta", st.delta},
                            {"pre_error", st.pre_error},
                            {"post_error", st.post_error},
                            {"stage_error", st.stage_error},
                            {"halving_trace", trace}});
    }
    return {{"target", target.to_json()},
            {"stages", stages_j},
            {"final_error", final_error},
            {"total_time", total_time.to_double()},
            {"total_time_exact", total_time.str()},
            {"loiter_segments", loiter_segments},
            {"loiter_collapse", loiter_collapse},
            {"rationalization_error", rationalization_error}};
}

std::string SteeringReport::stages_csv() const {
    std::string out = "stage,description,delta,pre_error,post_error,stage_error\n";
    char buf[256];
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const auto& st = stages[i];
        std::snprintf(buf, sizeof(buf), "%zu,\"%s\",%.17g,%.17g,%.17g,%.17g\n", i,
                      st.description.c_str(), st.delta, st.pre_error, st.post_error,
                      st.stage_error);
        out += buf;
    }
    return out;
}

nlohmann::json ProbeTable::to_json() const {
    nlohmann::json rows_j = nlohmann::json::array();
    for (const auto& r : rows)
        rows_j.push_back({{"delta", r.delta},
                          {"error", std::isfinite(r.error) ? nlohmann::json(r.error)
                                                           : nlohmann::json("inf")},
                          {"blew_up", r.blew_up}});
    return {{"rows", rows_j}, {"fitted_order", fitted_order}, {"limit", limit.to_json()}};
}

std::string ProbeTable::csv() const {
    std::string out = "delta,error,blew_up\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n", r.delta, r.error,
                      r.blew_up ? 1 : 0);
        out += buf;
    }
    return out;
}

std::string stability_csv(const std::vector<StabilityRow>& rows) {
    std::string out = "h,ratio\n";
    char buf[80];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", r.h, r.ratio);
        out += buf;
    }
    return out;
}

}  // namespace chsteer
