// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#pragma once

#include "chsteer/saturation.hpp"
#include "chsteer/schedule.hpp"
#include "chsteer/solver.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <utility>
#include <vector>

namespace chsteer {

/// Exact limit of the scaled move R_delta(u0, delta^{-1/2} phi, delta^{-1} eta0)
/// as delta -> 0:  u0 - phi phi_x + (1-d_xx)^{-1}(eta0 - 2 phi phi_x - phi_x phi_xx),
/// i.e. u0 + drift(phi) + (1-d_xx)^{-1} eta0.
TrigPoly limit_target(const TrigPoly& u0, const TrigPoly& phi, const TrigPoly& eta0);

/// Single-segment schedule for the shiftless ramp move towards u0 + increment:
/// duration t, constant value t^{-1} (1-d_xx) increment. Requires the
/// increment to lie in H0 (degree <= 1).
ControlSchedule step1_schedule(const TrigPoly& increment, const Rational& t);

/// One row of a stage log.
struct StageRecord {
    std::string description;
    double delta = 0.0;       // delta (or theta) finally used
    double pre_error = 0.0;   // H^s distance to the move's target before the stage
    double post_error = 0.0;  // ... after the stage
    double stage_error = 0.0; // achieved error against the stage's own increment
    std::vector<std::pair<double, double>> halving_trace;  // (delta, error) per attempt
};

struct SteeringReport {
    TrigPoly target;
    std::vector<StageRecord> stages;
    double final_error = 0.0;
    Rational total_time;
    int loiter_segments = 0;
    bool loiter_collapse = false;
    double rationalization_error = 0.0;

    nlohmann::json to_json() const;
    std::string stages_csv() const;
};

/// A stage could not meet its error budget within the halving limit.
struct StageFailureError : std::runtime_error {
    StageFailureError(std::string stage_, double best_error_, double budget_);
    std::string stage;
    double best_error;
    double budget;
    SteeringReport partial_report;  // attached by the synthesis driver
};

struct MoveResult {
    ControlSchedule schedule;
    GridField end_state;
    double achieved_error = 0.0;  // vs state + realized(node)
    std::vector<StageRecord> stages;
};

/// Knobs shared by the synthesis entry points.
struct SteeringOptions {
    double initial_delta = 0.1;  // halved until the stage budget is met
    int max_halvings = 12;
    long long denominator_cap = 1'000'000;
    /// Band limit when reading the start state off the grid; <= 0 means
    /// max(deg target, 4).
    int from_grid_degree = 0;
    /// Soft cap on the emitted schedule duration (0 = none); implemented by
    /// shrinking the initial delta, since stage times are free parameters.
    double time_cap = 0.0;
};

/// Executes one MoveNode from the given state: for each phi the state is
/// steered up by +delta^{-1/2} phi (a fast ramp move, or recursively for
/// non-H0 phi), held there for the full duration delta under the constant
/// phase control (this is where the drift accrues, since delta * r^2 = 1),
/// and steered back down. eta rides in the last hold's control. delta is
/// halved (up to the limit) until each stage meets its budget share.
MoveResult elementary_move(const GridField& state, const MoveNode& node, double delta0,
                           double budget, const SolverConfig& cfg,
                           const SteeringOptions& opts = {});

/// Small-time synthesis: plans target - u0, executes
/// the stages with a geometric error-budget split (25% slack), and verifies
/// the terminal H^s error <= eps by simulation.
std::pair<ControlSchedule, SteeringReport> synthesize_small_time(
    const GridField& u0, const TrigPoly& target, double eps, const SolverConfig& cfg,
    const SteeringOptions& opts = {});

/// Fixed-horizon synthesis: steer close in small time,
/// loiter with zero control until the free drift approaches eps/2 (the
/// re-steer trigger; the loiter length comes from bisection on the free
/// trajectory), repeat; durations sum exactly to T.
std::pair<ControlSchedule, SteeringReport> synthesize_fixed_time(
    const GridField& u0, const TrigPoly& target, const Rational& T, double eps,
    const SolverConfig& cfg, const SteeringOptions& opts = {});

struct ProbeRow {
    double delta;
    double error;      // +inf when the run blew up
    bool blew_up = false;
};

struct ProbeTable {
    std::vector<ProbeRow> rows;
    double fitted_order = 0.0;  // log-log slope of error vs delta
    /// Exact limit increment drift(phi) + (1-d_xx)^{-1} eta0; the full limit
    /// state is u0 plus this.
    TrigPoly limit;

    nlohmann::json to_json() const;
    std::string csv() const;
};

/// Scaled-limit probe: integrates R_delta(u0, delta^{-1/2} phi, delta^{-1} eta0)
/// for each delta and records the H^s error against the exact limit. A
/// blow-up is recorded as an infinite-error row, not a failure. Rows run
/// concurrently when jobs > 1.
ProbeTable asymptotic_probe(const GridField& u0, const TrigPoly& phi, const TrigPoly& eta0,
                            const std::vector<double>& deltas, double s,
                            const SolverConfig& cfg, int jobs = 1);

struct StabilityRow {
    double h;      // perturbation H^s norm
    double ratio;  // ||R_t(u0+h d) - R_t(u0)|| / h
};

/// Flow-map stability probe: empirical Lipschitz ratios of the free flow
/// around u0 for a sweep of perturbation sizes (fixed smooth direction).
std::vector<StabilityRow> stability_probe(const GridField& u0,
                                          const std::vector<double>& sizes, double t,
                                          const SolverConfig& cfg);

/// Concatenation identity check: H^s discrepancy between one three-segment run and the
/// nested resolvent composition.
double concat_check(const GridField& u0, const H0Value& eta1, const H0Value& eta2,
                    const H0Value& eta3, double t1, double t2, double t3,
                    const SolverConfig& cfg);

std::string stability_csv(const std::vector<StabilityRow>& rows);

}  // namespace chsteer
