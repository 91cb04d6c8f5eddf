#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "afv/kernels.hpp"
#include "afv/levy.hpp"

namespace afv::charfn {

using Complex = std::complex<double>;

// Conditioning-time information entering the characteristic function through
// J(t, t0, Δ) = i0_sq - ξ1 ∫ H_Δ + remainder.
struct ModelState {
    double i0_sq = 0.0;     // spot squared average forward volatility
    double varsigma = 0.01; // sinusoidal scaling ς
    double z_t0_cos = 1.0;  // cos Z_{t0}
    double z_t0_sin = 0.0;  // sin Z_{t0}
    double remainder = 0.0; // calibrated r(t0, t) for the active maturity

    void validate() const;
    // |r| <= (t-t0)²/Δ + 3ς
    double remainder_bound(double t0, double t, double delta) const;
};

struct ModelParams {
    levy::TemperedStableParams ts;
    levy::StableParams stable;
    kernels::KernelSpec kernel;
    double vbar = 0.0;   // reversion level
    double v0 = 0.04;    // initial instantaneous variance
    double delta = 6.0 / 73.0;  // averaging window, years
    double varsigma = 0.01;     // sinusoidal scale carried by the dynamics

    void validate() const;
};

// Cubic smoothing-spline fit of the sinusoidal factor M(l), real and
// imaginary parts separately; evaluation only inside the knot range.
struct SplineCF {
    std::vector<double> knots;
    std::vector<double> re_val, re_dd;  // values and second derivatives
    std::vector<double> im_val, im_dd;
    double lambda = 0.0;
    double fit_mse_re = 0.0, fit_mse_im = 0.0;

    bool covers(double l) const { return !knots.empty() && l >= knots.front() && l <= knots.back(); }
    Complex eval(double l) const;
};

// Generic characteristic-function handle for the pricing layer. carrier() is
// the linear phase rate: eval(l)·e^{-il·carrier()} is slowly oscillating.
struct CharFn {
    virtual ~CharFn() = default;
    virtual Complex eval(double l) const = 0;
    virtual double carrier() const = 0;
};

// ψ(l, x; t0, Δ) from the conditional sinusoidal term. For the symmetric
// stable Z the Im[] coefficient vanishes identically.
Complex psi(Complex l, double x, const ModelState& state, const ModelParams& params);

// Conditional characteristic function of the average forward variance
// I²_t(Δ) given time-t0 information.
class AvgForwardVarianceCF : public CharFn {
  public:
    AvgForwardVarianceCF(const ModelParams& params, const ModelState& state, double t0, double t,
                         std::shared_ptr<const SplineCF> spline = nullptr);

    Complex eval(double l) const override;
    double carrier() const override;  // J + ς

    double kernel_forward_value() const { return j_; }       // J(t, t0, Δ)
    double xi1() const { return xi1_; }
    double integrated_H() const { return int_H_; }           // ∫_{t0}^t H_Δ
    Complex sinusoidal_factor(double l) const;                // M(l), spline-free
    Complex log_jump_factor(double l) const;                  // ∫ log φ_{X1}(l H_Δ) ds

    const ModelParams& params() const { return params_; }
    const ModelState& state() const { return state_; }
    double maturity() const { return t_; }
    double anchor_time() const { return t0_; }

  private:
    ModelParams params_;
    ModelState state_;
    double t0_, t_;
    std::shared_ptr<const SplineCF> spline_;
    std::vector<double> s_nodes_, s_weights_, H_vals_;
    std::vector<double> wrapped_cos_coeffs_;  // A_m = ∫ cos(mx) g(x) dx
    double uncaptured_mass_ = 0.0;            // 1 - A_0
    double xi1_ = 0.0, int_H_ = 0.0, j_ = 0.0;
    double gamma_rate_ = 0.0;                 // dγ/dl = ς(1-e^{-Δ})/Δ
    double zeta0_ = 0.0;                      // atan2(sin Z_{t0}, cos Z_{t0})
};

Complex cf_avg_forward_variance(double l, const ModelParams& params, const ModelState& state,
                                double t0, double t,
                                std::shared_ptr<const SplineCF> spline = nullptr);

// Penalized least-squares smoothing spline of l -> M(l) over a symmetric
// grid; minimizes λ Σ residual² + (1-λ) ∫ f''².
SplineCF build_spline_cf(const ModelParams& params, const ModelState& state, double t0, double t,
                         int grid_n, double domain_halfwidth, double lambda);

// Closed-form conditional characteristic function of the partial forward
// variance under the type-III kernel and tempered-stable jumps. delta = 0
// gives the instantaneous variance. state.i0_sq carries the spot partial
// forward variance that conditions the formula.
Complex cf_partial_forward_variance_closed(double l, const ModelParams& params, const ModelState& state,
                                           double t0, double t, double delta);

// Unconditional characteristic function of the time-changed average forward
// variance: outer integral over the time-change density (itself a Fourier
// inversion), inner factor from cf_avg_forward_variance at t0 = 0. The two
// numerical integrals are evaluated in sequence, never interchanged.
Complex cf_timechanged(double l, const ModelParams& params, const kernels::KernelSpec& tc_kernel,
                       const levy::TemperedStableParams& y, double t);

}  // namespace afv::charfn
