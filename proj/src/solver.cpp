// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#include "chsteer/solver.hpp"

#include <fftw3.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <numbers>

namespace chsteer {

namespace {

// FFTW plan creation is not thread-safe; executions on distinct plans are.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Per-grid FFTW plans and scratch. One instance per integration; executions
/// do not share state across instances.
class SpectralWorkspace {
  public:
    explicit SpectralWorkspace(int n)
        : n_(n), nc_(n / 2 + 1),
          real_(fftw_alloc_real(n)),
          cplx_(fftw_alloc_complex(nc_)) {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fwd_ = fftw_plan_dft_r2c_1d(n_, real_, cplx_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(n_, cplx_, real_, FFTW_ESTIMATE);
    }
    ~SpectralWorkspace() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(cplx_);
        fftw_free(real_);
    }
    SpectralWorkspace(const SpectralWorkspace&) = delete;
    SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

    int n() const { return n_; }
    int nc() const { return nc_; }

    // Normalized analysis: coef[k] = (1/n) sum_j g_j e^{-i k x_j}, so that
    // a_k = 2 Re coef[k], b_k = -2 Im coef[k], a_0 = Re coef[0].
    void forward(const std::vector<double>& grid, std::vector<std::complex<double>>& coef) {
        std::memcpy(real_, grid.data(), sizeof(double) * n_);
        fftw_execute(fwd_);
        coef.resize(nc_);
        const double inv = 1.0 / n_;
        for (int k = 0; k < nc_; ++k)
            coef[k] = std::complex<double>(cplx_[k][0] * inv, cplx_[k][1] * inv);
    }

    void inverse(const std::vector<std::complex<double>>& coef, std::vector<double>& grid) {
        for (int k = 0; k < nc_; ++k) {
            cplx_[k][0] = coef[k].real();
            cplx_[k][1] = coef[k].imag();
        }
        fftw_execute(bwd_);
        grid.resize(n_);
        std::memcpy(grid.data(), real_, sizeof(double) * n_);
    }

  private:
    int n_;
    int nc_;
    double* real_;
    fftw_complex* cplx_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

int dealias_cutoff(int n) { return (n - 1) / 3; }

void truncate(std::vector<std::complex<double>>& coef, int kmax) {
    for (int k = kmax + 1; k < static_cast<int>(coef.size()); ++k) coef[k] = 0.0;
}

double hs_norm_from_coef(const std::vector<std::complex<double>>& coef, double s) {
    double a0 = coef[0].real();
    double sum = a0 * a0;
    for (int k = 1; k < static_cast<int>(coef.size()); ++k) {
        double ak = 2.0 * coef[k].real();
        double bk = -2.0 * coef[k].imag();
        sum += 0.5 * std::pow(1.0 + static_cast<double>(k) * k, s) * (ak * ak + bk * bk);
    }
    return std::sqrt(sum);
}

/// Evaluates the inverted-form right-hand side in place. All scratch lives in
/// the caller so the integrator allocates nothing per step.
class RhsEvaluator {
  public:
    RhsEvaluator(SpectralWorkspace& ws, const SolverConfig& cfg)
        : ws_(ws), cfg_(cfg), kmax_(cfg.dealias ? dealias_cutoff(cfg.n) : cfg.n / 2 - 1) {}

    void set_shift(const std::vector<double>& phi) { phi_ = &phi; }
    void set_forcing(const std::vector<double>& f) { f_ = &f; }

    void operator()(const std::vector<double>& u, std::vector<double>& out) {
        const int n = ws_.n();
        v_.resize(n);
        for (int i = 0; i < n; ++i) v_[i] = u[i] + (*phi_)[i];
        ws_.forward(v_, vhat_);

        vt_ = vhat_;
        truncate(vt_, kmax_);
        const int nc = ws_.nc();
        dx_.resize(nc);
        dxx_.resize(nc);
        for (int k = 0; k < nc; ++k) {
            std::complex<double> ik(0.0, static_cast<double>(k));
            dx_[k] = ik * vt_[k];
            dxx_[k] = -static_cast<double>(k) * k * vt_[k];
        }
        if (kmax_ >= ws_.nc() - 1) dx_[nc - 1] = 0.0;  // no odd Nyquist derivative
        ws_.inverse(vt_, vg_);
        ws_.inverse(dx_, vxg_);
        ws_.inverse(dxx_, vxxg_);

        p1_.resize(n);
        p2_.resize(n);
        for (int i = 0; i < n; ++i) {
            p1_[i] = vg_[i] * vxg_[i];
            p2_[i] = vxg_[i] * vxxg_[i];
        }
        ws_.forward(p1_, p1h_);
        ws_.forward(p2_, p2h_);
        truncate(p1h_, kmax_);
        truncate(p2h_, kmax_);

        outh_.resize(nc);
        const double two_kappa = 2.0 * cfg_.kappa;
        for (int k = 0; k < nc; ++k) {
            double invh = 1.0 / (1.0 + static_cast<double>(k) * k);
            std::complex<double> ik(0.0, static_cast<double>(k));
            std::complex<double> lin = (k == ws_.nc() - 1)
                                           ? std::complex<double>(0.0)
                                           : -two_kappa * invh * (ik * vhat_[k]);
            outh_[k] = lin - p1h_[k] - invh * (2.0 * p1h_[k] + p2h_[k]);
        }
        ws_.inverse(outh_, out);
        for (int i = 0; i < n; ++i) out[i] += (*f_)[i];
    }

  private:
    SpectralWorkspace& ws_;
    const SolverConfig& cfg_;
    int kmax_;
    const std::vector<double>* phi_ = nullptr;
    const std::vector<double>* f_ = nullptr;
    std::vector<double> v_, vg_, vxg_, vxxg_, p1_, p2_;
    std::vector<std::complex<double>> vhat_, vt_, dx_, dxx_, p1h_, p2h_, outh_;
};

std::vector<double> smooth_forcing(SpectralWorkspace& ws, const std::vector<double>& eta) {
    std::vector<std::complex<double>> ehat;
    ws.forward(eta, ehat);
    for (int k = 0; k < static_cast<int>(ehat.size()); ++k)
        ehat[k] /= 1.0 + static_cast<double>(k) * k;
    std::vector<double> f;
    ws.inverse(ehat, f);
    return f;
}

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 35.0 / 384 - 5179.0 / 57600, E3 = 500.0 / 1113 - 7571.0 / 16695,
                 E4 = 125.0 / 192 - 393.0 / 640, E5 = -2187.0 / 6784 + 92097.0 / 339200,
                 E6 = 11.0 / 84 - 187.0 / 2100, E7 = -1.0 / 40;

class Dopri5 {
  public:
    Dopri5(RhsEvaluator& f, int n, const SolverConfig& cfg) : f_(f), cfg_(cfg) {
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &y5_})
            v->assign(n, 0.0);
    }

    /// Advances y from t0 to t0+duration, restarting the controller. Calls
    /// on_accept(t, y) after every accepted step.
    template <typename Callback>
    void run_segment(std::vector<double>& y, double t0, double duration, Callback&& on_accept) {
        if (duration <= 0.0) return;
        const int n = static_cast<int>(y.size());
        double t = 0.0;  // time within the segment
        f_(y, k1_);
        double h = initial_step(y, k1_, duration);
        const double hmin = std::max(duration * 1e-14, 1e-300);
        bool fsal_fresh = true;
        while (t < duration) {
            h = std::min({h, cfg_.dt_max, duration - t});
            if (!fsal_fresh) f_(y, k1_), fsal_fresh = true;

            stage(y, k1_, A21, h);
            f_(ytmp_, k2_);
            stage2(y, k1_, A31, k2_, A32, h);
            f_(ytmp_, k3_);
            stage3(y, k1_, A41, k2_, A42, k3_, A43, h);
            f_(ytmp_, k4_);
            stage4(y, k1_, A51, k2_, A52, k3_, A53, k4_, A54, h);
            f_(ytmp_, k5_);
            stage5(y, k1_, A61, k2_, A62, k3_, A63, k4_, A64, k5_, A65, h);
            f_(ytmp_, k6_);
            for (int i = 0; i < n; ++i)
                y5_[i] = y[i] + h * (B1 * k1_[i] + B3 * k3_[i] + B4 * k4_[i] + B5 * k5_[i] +
                                     B6 * k6_[i]);
            f_(y5_, k7_);

            double err = 0.0;
            bool finite = true;
            for (int i = 0; i < n; ++i) {
                double e = h * (E1 * k1_[i] + E3 * k3_[i] + E4 * k4_[i] + E5 * k5_[i] +
                                E6 * k6_[i] + E7 * k7_[i]);
                double sc = cfg_.atol + cfg_.rtol * std::max(std::abs(y[i]), std::abs(y5_[i]));
                if (!std::isfinite(y5_[i])) {
                    finite = false;
                    break;
                }
                err += (e / sc) * (e / sc);
            }
            err = finite ? std::sqrt(err / n) : std::numeric_limits<double>::infinity();

            if (err <= 1.0) {
                t += h;
                std::swap(y, y5_);
                std::swap(k1_, k7_);  // FSAL
                on_accept(t0 + t, y);
                double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
                h *= std::clamp(fac, 0.2, 5.0);
            } else {
                if (h <= hmin * (1.0 + 1e-12)) throw StepFailureError(t0 + t, h);
                double fac = std::isfinite(err) ? 0.9 * std::pow(err, -0.2) : 0.1;
                h *= std::clamp(fac, 0.1, 0.5);
                h = std::max(h, hmin);
                // the rejected y5_ left k1_ intact; no FSAL swap happened
            }
        }
    }

  private:
    double initial_step(const std::vector<double>& y, const std::vector<double>& f0,
                        double duration) const {
        double ymax = 1.0, fmax = 1.0;
        for (double v : y) ymax = std::max(ymax, std::abs(v));
        for (double v : f0) fmax = std::max(fmax, std::abs(v));
        double h = 0.01 * ymax / fmax;
        return std::clamp(h, duration * 1e-8, std::min(cfg_.dt_max, duration));
    }

    void stage(const std::vector<double>& y, const std::vector<double>& k1, double a, double h) {
        for (std::size_t i = 0; i < y.size(); ++i) ytmp_[i] = y[i] + h * a * k1[i];
    }
    void stage2(const std::vector<double>& y, const std::vector<double>& k1, double a1,
                const std::vector<double>& k2, double a2, double h) {
        for (std::size_t i = 0; i < y.size(); ++i)
            ytmp_[i] = y[i] + h * (a1 * k1[i] + a2 * k2[i]);
    }
    void stage3(const std::vector<double>& y, const std::vector<double>& k1, double a1,
                const std::vector<double>& k2, double a2, const std::vector<double>& k3,
                double a3, double h) {
        for (std::size_t i = 0; i < y.size(); ++i)
            ytmp_[i] = y[i] + h * (a1 * k1[i] + a2 * k2[i] + a3 * k3[i]);
    }
    void stage4(const std::vector<double>& y, const std::vector<double>& k1, double a1,
                const std::vector<double>& k2, double a2, const std::vector<double>& k3,
                double a3, const std::vector<double>& k4, double a4, double h) {
        for (std::size_t i = 0; i < y.size(); ++i)
            ytmp_[i] = y[i] + h * (a1 * k1[i] + a2 * k2[i] + a3 * k3[i] + a4 * k4[i]);
    }
    void stage5(const std::vector<double>& y, const std::vector<double>& k1, double a1,
                const std::vector<double>& k2, double a2, const std::vector<double>& k3,
                double a3, const std::vector<double>& k4, double a4,
                const std::vector<double>& k5, double a5, double h) {
        for (std::size_t i = 0; i < y.size(); ++i)
            ytmp_[i] =
                y[i] + h * (a1 * k1[i] + a2 * k2[i] + a3 * k3[i] + a4 * k4[i] + a5 * k5[i]);
    }

    RhsEvaluator& f_;
    const SolverConfig& cfg_;
    std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, y5_;
};

}  // namespace

void SolverConfig::validate() const {
    validate_grid_size(n);
    if (kappa < 0) throw std::invalid_argument("SolverConfig: kappa must be >= 0");
    if (rtol <= 0 || atol <= 0) throw std::invalid_argument("SolverConfig: tolerances must be positive");
    if (dt_max <= 0) throw std::invalid_argument("SolverConfig: dt_max must be positive");
    if (blowup_cap <= 0) throw std::invalid_argument("SolverConfig: blowup_cap must be positive");
}

nlohmann::json SolverConfig::to_json() const {
    return {{"n", n},
            {"kappa", kappa},
            {"dealias", dealias},
            {"rtol", rtol},
            {"atol", atol},
            {"dt_max", dt_max},
            {"blowup_cap", blowup_cap},
            {"s_monitor", s_monitor}};
}

SolverConfig SolverConfig::from_json(const nlohmann::json& j) {
    SolverConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "n") cfg.n = value.get<int>();
        else if (key == "kappa") cfg.kappa = value.get<double>();
        else if (key == "dealias") cfg.dealias = value.get<bool>();
        else if (key == "rtol") cfg.rtol = value.get<double>();
        else if (key == "atol") cfg.atol = value.get<double>();
        else if (key == "dt_max") cfg.dt_max = value.get<double>();
        else if (key == "blowup_cap") cfg.blowup_cap = value.get<double>();
        else if (key == "s_monitor") cfg.s_monitor = value.get<double>();
        else throw std::invalid_argument("SolverConfig: unknown key \"" + key + "\"");
    }
    cfg.validate();
    return cfg;
}

BlowUpError::BlowUpError(double t_, double norm_)
    : std::runtime_error("solution norm exceeded the blow-up cap at t = " + std::to_string(t_)),
      t(t_), norm(norm_) {}

StepFailureError::StepFailureError(double t_, double dt_)
    : std::runtime_error("step controller failed at t = " + std::to_string(t_)),
      t(t_), dt(dt_) {}

double hs_norm(const GridField& g, double s) {
    validate_grid_size(g.n);
    SpectralWorkspace ws(g.n);
    std::vector<std::complex<double>> coef;
    ws.forward(g.values, coef);
    return hs_norm_from_coef(coef, s);
}

std::pair<double, double> invariants(const GridField& g) {
    validate_grid_size(g.n);
    SpectralWorkspace ws(g.n);
    std::vector<std::complex<double>> coef;
    ws.forward(g.values, coef);
    const double two_pi = 2.0 * std::numbers::pi;
    double mean = two_pi * coef[0].real();
    double a0 = coef[0].real();
    double energy = a0 * a0;
    for (int k = 1; k < static_cast<int>(coef.size()); ++k) {
        double ak = 2.0 * coef[k].real();
        double bk = -2.0 * coef[k].imag();
        energy += 0.5 * (1.0 + static_cast<double>(k) * k) * (ak * ak + bk * bk);
    }
    return {mean, two_pi * energy};
}

GridField rhs(const GridField& u, const GridField& phi, const GridField& f,
              const SolverConfig& cfg) {
    cfg.validate();
    if (u.n != cfg.n || phi.n != cfg.n || f.n != cfg.n)
        throw std::invalid_argument("rhs: all fields must share cfg.n");
    SpectralWorkspace ws(cfg.n);
    RhsEvaluator eval(ws, cfg);
    eval.set_shift(phi.values);
    eval.set_forcing(f.values);
    GridField out = GridField::zeros(cfg.n);
    eval(u.values, out.values);
    if (!out.all_finite()) throw std::invalid_argument("rhs: non-finite intermediate");
    return out;
}

Trajectory integrate(const GridField& u0, const GridField& phi,
                     const std::vector<ForcingSegment>& segments, double t_end,
                     const SolverConfig& cfg, int max_samples) {
    cfg.validate();
    if (u0.n != cfg.n || phi.n != cfg.n)
        throw std::invalid_argument("integrate: field size does not match cfg.n");
    if (!u0.all_finite()) throw std::invalid_argument("integrate: non-finite initial state");

    double total = 0.0;
    for (const auto& seg : segments) {
        if (seg.duration <= 0.0)
            throw std::invalid_argument("integrate: segment durations must be positive");
        total += seg.duration;
    }
    if (t_end <= 0.0) t_end = total;

    SpectralWorkspace ws(cfg.n);
    RhsEvaluator eval(ws, cfg);
    eval.set_shift(phi.values);
    Dopri5 stepper(eval, cfg.n, cfg);

    Trajectory traj;
    std::vector<std::complex<double>> coef;
    auto record = [&](double t, const std::vector<double>& y) {
        traj.times.push_back(t);
        traj.states.push_back(GridField{cfg.n, y});
        ws.forward(y, coef);
        traj.hs_norms.push_back(hs_norm_from_coef(coef, cfg.s_monitor));
        double a0 = coef[0].real();
        double energy = a0 * a0;
        for (int k = 1; k < static_cast<int>(coef.size()); ++k) {
            double ak = 2.0 * coef[k].real();
            double bk = -2.0 * coef[k].imag();
            energy += 0.5 * (1.0 + static_cast<double>(k) * k) * (ak * ak + bk * bk);
        }
        const double two_pi = 2.0 * std::numbers::pi;
        traj.means.push_back(two_pi * a0);
        traj.energies.push_back(two_pi * energy);
    };

    std::vector<double> y = u0.values;
    record(0.0, y);
    const double stride = max_samples > 0 ? t_end / max_samples : t_end;
    double last_recorded = 0.0;

    auto on_accept = [&](double t, const std::vector<double>& state) {
        ws.forward(state, coef);
        double norm = hs_norm_from_coef(coef, cfg.s_monitor);
        if (!std::isfinite(norm) || norm > cfg.blowup_cap) throw BlowUpError(t, norm);
        if (t - last_recorded >= stride) {
            record(t, state);
            last_recorded = t;
        }
    };

    double t0 = 0.0;
    auto run_piece = [&](double duration, const std::vector<double>& eta) {
        if (duration <= 0.0) return;
        std::vector<double> f = smooth_forcing(ws, eta);
        eval.set_forcing(f);
        stepper.run_segment(y, t0, duration, on_accept);
        t0 += duration;
        if (traj.times.back() != t0) {
            record(t0, y);
            last_recorded = t0;
        }
    };

    double remaining = t_end;
    for (const auto& seg : segments) {
        if (remaining <= 0.0) break;
        double dur = std::min(seg.duration, remaining);
        if (seg.eta.n != cfg.n)
            throw std::invalid_argument("integrate: segment field size mismatch");
        run_piece(dur, seg.eta.values);
        remaining -= dur;
    }
    if (remaining > 0.0) run_piece(remaining, std::vector<double>(cfg.n, 0.0));
    return traj;
}

Trajectory integrate(const GridField& u0, const TrigPoly& phi,
                     const ControlSchedule& schedule, double t_end,
                     const SolverConfig& cfg, int max_samples) {
    std::vector<ForcingSegment> segments;
    segments.reserve(schedule.size());
    for (const auto& seg : schedule.segments()) {
        segments.push_back({seg.duration.to_double(), to_grid(seg.value.to_poly(), cfg.n)});
    }
    return integrate(u0, to_grid(phi, cfg.n), segments, t_end, cfg, max_samples);
}

GridField resolvent(const GridField& u0, const GridField& phi, const GridField& eta,
                    double t, const SolverConfig& cfg) {
    if (t == 0.0) return u0;
    std::vector<ForcingSegment> segments{{t, eta}};
    return integrate(u0, phi, segments, t, cfg, 1).final_state();
}

GridField resolvent(const GridField& u0, const TrigPoly& phi, const TrigPoly& eta,
                    double t, const SolverConfig& cfg) {
    return resolvent(u0, to_grid(phi, cfg.n), to_grid(eta, cfg.n), t, cfg);
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t,mean,energy,hs_norm\n";
    char buf[160];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", traj.times[i],
                      traj.means[i], traj.energies[i], traj.hs_norms[i]);
        out += buf;
    }
    return out;
}

std::vector<unsigned char> trajectory_snapshots(const Trajectory& traj) {
    std::vector<unsigned char> out;
    auto push = [&](const void* p, std::size_t bytes) {
        const auto* b = static_cast<const unsigned char*>(p);
        out.insert(out.end(), b, b + bytes);
    };
    std::int64_t n = traj.states.empty() ? 0 : traj.states.front().n;
    push(&n, 8);
    for (const auto& snap : traj.states)
        push(snap.values.data(), sizeof(double) * snap.values.size());
    return out;
}

}  // namespace chsteer
