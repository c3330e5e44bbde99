// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#pragma once

#include "chsteer/grid_field.hpp"
#include "chsteer/schedule.hpp"
#include "chsteer/trig_poly.hpp"

#include <nlohmann/json_fwd.hpp>

#include <stdexcept>
#include <utility>
#include <vector>

namespace chsteer {

/// Fourier pseudospectral configuration for the inverted controlled
/// Camassa-Holm equation
///
///   u_t = A(u+phi) - (u+phi) d_x(u+phi)
///         - (1-d_xx)^{-1}[ 2(u+phi) d_x(u+phi) + d_x(u+phi) d_xx(u+phi) ]
///         + f,                 A = -2*kappa*(1-d_xx)^{-1} d_x,
///
/// with f = (1-d_xx)^{-1} eta. kappa = 1/2 reproduces the +u_x linear term.
struct SolverConfig {
    int n = 256;
    double kappa = 0.5;
    bool dealias = true;  // 2/3-rule truncation of every quadratic product
    double rtol = 1e-8;
    double atol = 1e-12;
    double dt_max = 0.1;
    double blowup_cap = 1e3;  // H^{s_monitor} abort threshold
    double s_monitor = 2.0;

    void validate() const;
    nlohmann::json to_json() const;
    /// Rejects unknown keys; missing keys keep their defaults.
    static SolverConfig from_json(const nlohmann::json& j);
};

/// Sampled solution curve with per-sample invariants.
struct Trajectory {
    std::vector<double> times;
    std::vector<GridField> states;
    std::vector<double> hs_norms;  // H^{s_monitor}
    std::vector<double> means;     // integral of u over the circle
    std::vector<double> energies;  // integral of u^2 + u_x^2

    const GridField& final_state() const { return states.back(); }
    double final_time() const { return times.back(); }
};

/// Numerical stand-in for the finite existence time T_*: the H^{s_monitor}
/// norm exceeded the configured cap.
struct BlowUpError : std::runtime_error {
    BlowUpError(double t_, double norm_);
    double t;
    double norm;
};

/// The embedded error controller could not satisfy the tolerances.
struct StepFailureError : std::runtime_error {
    StepFailureError(double t_, double dt_);
    double t;
    double dt;
};

/// Sobolev norm of a grid state from its discrete Fourier coefficients,
/// same convention as TrigPoly::hs_norm.
double hs_norm(const GridField& g, double s);

/// (mean, energy) by spectral quadrature: (int u dx, int u^2 + u_x^2 dx).
std::pair<double, double> invariants(const GridField& g);

/// One spectral right-hand-side evaluation. All fields share cfg.n. The
/// forcing argument is the smoothed f = (1-d_xx)^{-1} eta, added verbatim.
GridField rhs(const GridField& u, const GridField& phi, const GridField& f,
              const SolverConfig& cfg);

/// Constant-in-time forcing over one interval. eta is the raw control
/// density; the solver applies (1-d_xx)^{-1} once per segment.
struct ForcingSegment {
    double duration;
    GridField eta;
};

/// Adaptive Dormand-Prince 5(4) method of lines over the segment list.
/// Integration restarts exactly at each segment boundary (the control is
/// discontinuous there). If t_end exceeds the total segment duration the
/// remainder is integrated with zero control; t_end <= 0 means the exact
/// total duration. max_samples bounds interior trajectory recording.
Trajectory integrate(const GridField& u0, const GridField& phi,
                     const std::vector<ForcingSegment>& segments, double t_end,
                     const SolverConfig& cfg, int max_samples = 256);

/// Schedule-driven overload; each H0 segment value is rendered to the grid.
Trajectory integrate(const GridField& u0, const TrigPoly& phi,
                     const ControlSchedule& schedule, double t_end,
                     const SolverConfig& cfg, int max_samples = 256);

/// The resolvent map R_t(u0, phi, eta): terminal snapshot of the flow with
/// constant shift phi and constant control eta.
GridField resolvent(const GridField& u0, const GridField& phi, const GridField& eta,
                    double t, const SolverConfig& cfg);
GridField resolvent(const GridField& u0, const TrigPoly& phi, const TrigPoly& eta,
                    double t, const SolverConfig& cfg);

/// Writes "t,mean,energy,hs_norm" rows (17 significant digits).
std::string trajectory_csv(const Trajectory& traj);

/// Little-endian binary snapshot dump: int64 n, then n doubles per
/// snapshot (sample times are in the CSV).
std::vector<unsigned char> trajectory_snapshots(const Trajectory& traj);

}  // namespace chsteer
