#include "afv/charfn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "afv/quad.hpp"
#include "afv/specfun.hpp"

namespace afv::charfn {

namespace {

const Complex kI(0.0, 1.0);

// ---------------------------------------------------------------------------
// Wrapped stable density: g(x) = Σ_m f(x + 2πm) on [0, 2π), built from
// stable_density values plus an analytic tail-mass correction for the
// uncounted wraps. Only the cosine coefficients A_m = ∫ cos(mx) g(x) dx are
// kept; they carry the whole x-integral of the periodic ψ factor.
// ---------------------------------------------------------------------------

struct WrappedDensity {
    double t, alpha;
    std::vector<double> coeffs;  // A_0 .. A_K
};

std::shared_ptr<const WrappedDensity> build_wrapped(double t, double alpha, int grid_n, int wraps) {
    auto out = std::make_shared<WrappedDensity>();
    out->t = t;
    out->alpha = alpha;
    const int K = std::clamp(static_cast<int>(std::ceil(std::pow(37.0 / t, 1.0 / alpha))) + 8, 16, grid_n / 3);
    const double tp = 2.0 * M_PI;
    std::vector<double> g(grid_n);
    for (int j = 0; j < grid_n; ++j) {
        const double x = tp * j / grid_n;
        double s = 0.0;
        for (int m = -wraps; m <= wraps; ++m) s += specfun::stable_density(x + tp * m, t, alpha);
        const double edge = tp * wraps + M_PI;
        s += (specfun::stable_tail_mass(edge + x, t, alpha) + specfun::stable_tail_mass(edge - x + tp, t, alpha)) / tp;
        g[j] = s;
    }
    out->coeffs.resize(K + 1);
    for (int m = 0; m <= K; ++m) {
        double a = 0.0;
        for (int j = 0; j < grid_n; ++j) a += g[j] * std::cos(m * tp * j / grid_n);
        out->coeffs[m] = a * tp / grid_n;
    }
    return out;
}

std::map<std::tuple<long long, long long, int, int>, std::shared_ptr<const WrappedDensity>> g_wrapped_cache;
std::mutex g_wrapped_mutex;

std::shared_ptr<const WrappedDensity> wrapped_density(double t, double alpha, int grid_n = 2048, int wraps = 48) {
    const auto key = std::make_tuple(static_cast<long long>(std::llround(t * 1e12)),
                                     static_cast<long long>(std::llround(alpha * 1e12)), grid_n, wraps);
    std::lock_guard<std::mutex> lock(g_wrapped_mutex);
    auto it = g_wrapped_cache.find(key);
    if (it != g_wrapped_cache.end()) return it->second;
    auto p = build_wrapped(t, alpha, grid_n, wraps);
    g_wrapped_cache.emplace(key, p);
    return p;
}

// Re/Im of (φ_{Z1}(1)^Δ - 1)/log φ_{Z1}(1); the symmetric stable CF at 1 is
// e^{-1}, so the imaginary part is exactly zero.
std::pair<double, double> sinusoidal_factors(const levy::StableParams& stable, double delta) {
    const Complex phi1(levy::stable_char(stable, 1.0, 1.0), 0.0);
    const Complex ratio = (std::pow(phi1, delta) - 1.0) / std::log(phi1);
    return {ratio.real(), ratio.imag()};
}

}  // namespace

void ModelState::validate() const {
    if (i0_sq < 0.0) throw std::invalid_argument("ModelState: i0_sq must be nonnegative");
    if (!(varsigma >= 0.0)) throw std::invalid_argument("ModelState: varsigma must be nonnegative");
    if (std::abs(z_t0_cos) > 1.0 + 1e-12 || std::abs(z_t0_sin) > 1.0 + 1e-12 ||
        std::abs(z_t0_cos * z_t0_cos + z_t0_sin * z_t0_sin - 1.0) > 1e-9)
        throw std::invalid_argument("ModelState: (cos Z_t0, sin Z_t0) must lie on the unit circle");
}

double ModelState::remainder_bound(double t0, double t, double delta) const {
    return (t - t0) * (t - t0) / delta + 3.0 * varsigma;
}

void ModelParams::validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("ModelParams: delta must be positive");
    if (!(v0 > 0.0)) throw std::invalid_argument("ModelParams: v0 must be positive");
    if (vbar < 0.0) throw std::invalid_argument("ModelParams: vbar must be nonnegative");
    if (varsigma < 0.0) throw std::invalid_argument("ModelParams: varsigma must be nonnegative");
}

Complex SplineCF::eval(double l) const {
    if (!covers(l)) throw std::domain_error("SplineCF: evaluation outside the knot grid");
    const auto it = std::upper_bound(knots.begin(), knots.end(), l);
    std::size_t i = std::min(static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - knots.begin() - 1, 0)),
                             knots.size() - 2);
    const double h = knots[i + 1] - knots[i];
    const double A = (knots[i + 1] - l) / h, B = 1.0 - A;
    const double cA = (A * A * A - A) * h * h / 6.0, cB = (B * B * B - B) * h * h / 6.0;
    return {A * re_val[i] + B * re_val[i + 1] + cA * re_dd[i] + cB * re_dd[i + 1],
            A * im_val[i] + B * im_val[i + 1] + cA * im_dd[i] + cB * im_dd[i + 1]};
}

Complex psi(Complex l, double x, const ModelState& state, const ModelParams& params) {
    state.validate();
    const auto [re_fac, im_fac] = sinusoidal_factors(params.stable, params.delta);
    const double cz = state.z_t0_cos, sz = state.z_t0_sin;
    const double ang = re_fac * (std::cos(x) * cz - std::sin(x) * sz) -
                       im_fac * (std::sin(x) * cz + std::cos(x) * sz) + params.delta;
    return std::exp(kI * l * state.varsigma / params.delta * ang);
}

// ---------------------------------------------------------------------------
// AvgForwardVarianceCF
// ---------------------------------------------------------------------------

AvgForwardVarianceCF::AvgForwardVarianceCF(const ModelParams& params, const ModelState& state, double t0,
                                           double t, std::shared_ptr<const SplineCF> spline)
    : params_(params), state_(state), t0_(t0), t_(t), spline_(std::move(spline)) {
    params_.validate();
    state_.validate();
    if (!(t0 >= 0.0 && t0 < t)) throw std::invalid_argument("AvgForwardVarianceCF: needs 0 <= t0 < t");
    const double bound = state_.remainder_bound(t0, t, params_.delta);
    if (std::abs(state_.remainder) > bound * (1.0 + 1e-12))
        throw std::domain_error("AvgForwardVarianceCF: remainder exceeds its admissible bound");

    const double tt = t - t0;
    // segment the s-domain at the type-III kernel breakpoints
    std::vector<double> bps{0.0, tt};
    if (params_.kernel.family == kernels::Family::TypeIII) {
        for (double b : {params_.kernel.tau - params_.delta, params_.kernel.tau})
            if (b > 0.0 && b < tt) bps.push_back(b);
    }
    std::sort(bps.begin(), bps.end());

    const auto& g8 = quad::gauss_rule(8);
    const auto& g24 = quad::gauss_rule(24);
    auto push_panel = [&](double a, double b, const quad::GaussRule& r) {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            s_nodes_.push_back(c + h * r.x[i]);
            s_weights_.push_back(h * r.w[i]);
        }
    };
    for (std::size_t seg = 0; seg + 1 < bps.size(); ++seg) {
        const double a = bps[seg], b = bps[seg + 1];
        if (seg == 0) {
            // graded refinement towards the u^d cusp of H at zero
            double hi = b;
            for (int j = 0; j < 40 && hi > b * 1e-13; ++j) {
                const double lo = 0.5 * hi;
                push_panel(lo, hi, g8);
                hi = lo;
            }
        } else {
            const double target = std::min(0.25, 2.0 / params_.kernel.kappa);
            const int np = std::max(1, static_cast<int>(std::ceil((b - a) / target)));
            for (int i = 0; i < np; ++i)
                push_panel(a + (b - a) * i / np, a + (b - a) * (i + 1) / np, g24);
        }
    }

    H_vals_.resize(s_nodes_.size());
    int_H_ = 0.0;
    for (std::size_t i = 0; i < s_nodes_.size(); ++i) {
        H_vals_[i] = kernels::integrated_kernel(params_.kernel, params_.delta, s_nodes_[i]);
        int_H_ += s_weights_[i] * H_vals_[i];
    }

    xi1_ = levy::ts_moments(params_.ts).first;
    j_ = state_.i0_sq - xi1_ * int_H_ + state_.remainder;

    const auto [re_fac, im_fac] = sinusoidal_factors(params_.stable, params_.delta);
    (void)im_fac;  // identically zero for the symmetric stable Z
    gamma_rate_ = state_.varsigma * re_fac / params_.delta;
    zeta0_ = std::atan2(state_.z_t0_sin, state_.z_t0_cos);

    if (state_.varsigma > 0.0) {
        auto wd = wrapped_density(tt, params_.stable.alpha);
        wrapped_cos_coeffs_ = wd->coeffs;
        uncaptured_mass_ = 1.0 - wrapped_cos_coeffs_[0];
    }
}

Complex AvgForwardVarianceCF::sinusoidal_factor(double l) const {
    if (state_.varsigma == 0.0 || l == 0.0) return 1.0;
    const double gamma = gamma_rate_ * l;
    const int K = static_cast<int>(wrapped_cos_coeffs_.size()) - 1;
    const auto J = quad::bessel_j_array(K, std::abs(gamma));
    const double sgn = gamma < 0.0 ? -1.0 : 1.0;
    Complex sum = wrapped_cos_coeffs_[0] * J[0];
    Complex ipow = kI;
    double s = sgn;
    for (int m = 1; m <= K; ++m) {
        sum += 2.0 * ipow * (s * J[m]) * wrapped_cos_coeffs_[m] * std::cos(m * zeta0_);
        ipow *= kI;
        s *= sgn;
    }
    return uncaptured_mass_ + std::exp(kI * l * state_.varsigma) * sum;
}

Complex AvgForwardVarianceCF::log_jump_factor(double l) const {
    if (l == 0.0) return 0.0;
    const auto& ts = params_.ts;
    if (ts.c < 1e-12) {
        Complex s = 0.0;
        for (std::size_t i = 0; i < s_nodes_.size(); ++i)
            s += s_weights_[i] * std::log(1.0 - kI * (l * H_vals_[i]) / ts.b);
        return -ts.a * s;
    }
    const double bc = std::pow(ts.b, ts.c);
    Complex sum_pow = 0.0;
    double sum_w = 0.0;
    for (std::size_t i = 0; i < s_nodes_.size(); ++i) {
        sum_pow += s_weights_[i] * std::pow(Complex(ts.b, -l * H_vals_[i]), ts.c);
        sum_w += s_weights_[i];
    }
    return ts.a * std::tgamma(-ts.c) * (sum_pow - bc * sum_w);
}

Complex AvgForwardVarianceCF::eval(double l) const {
    if (l == 0.0) return 1.0;
    Complex m;
    if (spline_ && spline_->covers(l)) {
        m = spline_->eval(l);
    } else {
        m = sinusoidal_factor(l);
    }
    return std::exp(kI * (l * j_) + log_jump_factor(l)) * m;
}

double AvgForwardVarianceCF::carrier() const { return j_ + state_.varsigma; }

Complex cf_avg_forward_variance(double l, const ModelParams& params, const ModelState& state, double t0,
                                double t, std::shared_ptr<const SplineCF> spline) {
    AvgForwardVarianceCF cf(params, state, t0, t, std::move(spline));
    return cf.eval(l);
}

// ---------------------------------------------------------------------------
// Smoothing spline (Reinsch): minimize λ Σ (y-f)² + (1-λ) ∫ f''².
// ---------------------------------------------------------------------------

namespace {

struct SplineFit {
    std::vector<double> value;   // fitted values at the knots
    std::vector<double> second;  // natural-spline second derivatives
    double mse;
};

SplineFit reinsch_fit(const std::vector<double>& x, const std::vector<double>& y, double lambda) {
    const int n = static_cast<int>(x.size());
    const double mu = (1.0 - lambda) / lambda;
    const int m = n - 2;
    std::vector<double> h(n - 1);
    for (int i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];

    // A = R + mu QᵀQ, symmetric, bandwidth 2 (rows are interior knots 1..n-2)
    std::vector<double> d0(m, 0.0), d1(m, 0.0), d2(m, 0.0);
    auto q = [&](int col, int row) -> double {
        // Q entry at knot `row`, interior column `col` (col = 1..n-2)
        if (row == col - 1) return 1.0 / h[col - 1];
        if (row == col) return -1.0 / h[col - 1] - 1.0 / h[col];
        if (row == col + 1) return 1.0 / h[col];
        return 0.0;
    };
    for (int i = 0; i < m; ++i) {
        const int col = i + 1;
        d0[i] = (h[col - 1] + h[col]) / 3.0;
        if (i + 1 < m) d1[i] = h[col] / 6.0;
        for (int row = col - 1; row <= col + 1; ++row) d0[i] += mu * q(col, row) * q(col, row);
        if (i + 1 < m)
            for (int row = col; row <= col + 1; ++row) d1[i] += mu * q(col, row) * q(col + 1, row);
        if (i + 2 < m) d2[i] = mu * q(col, col + 1) * q(col + 2, col + 1);
    }
    // rhs = Qᵀ y
    std::vector<double> rhs(m);
    for (int i = 0; i < m; ++i) {
        const int col = i + 1;
        rhs[i] = y[col - 1] / h[col - 1] - y[col] * (1.0 / h[col - 1] + 1.0 / h[col]) + y[col + 1] / h[col];
    }

    // banded LDLᵀ with bandwidth 2
    std::vector<double> D(m), L1(m, 0.0), L2(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double di = d0[i];
        if (i >= 1) di -= L1[i - 1] * L1[i - 1] * D[i - 1];
        if (i >= 2) di -= L2[i - 2] * L2[i - 2] * D[i - 2];
        D[i] = di;
        if (i + 1 < m) {
            double e = d1[i];
            if (i >= 1) e -= L1[i - 1] * L2[i - 1] * D[i - 1];
            L1[i] = e / D[i];
        }
        if (i + 2 < m) L2[i] = d2[i] / D[i];
    }
    std::vector<double> z(m);
    for (int i = 0; i < m; ++i) {
        double v = rhs[i];
        if (i >= 1) v -= L1[i - 1] * z[i - 1];
        if (i >= 2) v -= L2[i - 2] * z[i - 2];
        z[i] = v;
    }
    std::vector<double> gam(m);
    for (int i = m - 1; i >= 0; --i) {
        double v = z[i] / D[i];
        if (i + 1 < m) v -= L1[i] * gam[i + 1];
        if (i + 2 < m) v -= L2[i] * gam[i + 2];
        gam[i] = v;
    }

    SplineFit fit;
    fit.value = y;
    // f = y - mu Q gamma
    std::vector<double> qg(n, 0.0);
    for (int i = 0; i < m; ++i) {
        const int col = i + 1;
        qg[col - 1] += q(col, col - 1) * gam[i];
        qg[col] += q(col, col) * gam[i];
        qg[col + 1] += q(col, col + 1) * gam[i];
    }
    double mse = 0.0;
    for (int i = 0; i < n; ++i) {
        fit.value[i] = y[i] - mu * qg[i];
        mse += (fit.value[i] - y[i]) * (fit.value[i] - y[i]);
    }
    fit.mse = mse / n;
    fit.second.assign(n, 0.0);
    for (int i = 0; i < m; ++i) fit.second[i + 1] = gam[i];  // natural ends
    return fit;
}

}  // namespace

SplineCF build_spline_cf(const ModelParams& params, const ModelState& state, double t0, double t,
                         int grid_n, double domain_halfwidth, double lambda) {
    if (grid_n < 100) throw std::invalid_argument("build_spline_cf: grid_n must be at least 100");
    if (!(domain_halfwidth > 0.0)) throw std::invalid_argument("build_spline_cf: domain must be symmetric about 0");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("build_spline_cf: lambda in (0, 1]");

    AvgForwardVarianceCF cf(params, state, t0, t);
    SplineCF out;
    out.lambda = lambda;
    // guard knots beyond the requested domain absorb the free-boundary bias
    // of the natural spline; evaluation stays restricted to [-W, W]
    const int pad = 8;
    const double h = 2.0 * domain_halfwidth / (grid_n - 1);
    const int n_all = grid_n + 2 * pad;
    std::vector<double> knots(n_all), yre(n_all), yim(n_all);
    for (int i = 0; i < n_all; ++i) {
        const double l = -domain_halfwidth + (i - pad) * h;
        knots[i] = l;
        const Complex m = cf.sinusoidal_factor(l);
        yre[i] = m.real();
        yim[i] = m.imag();
    }
    const auto fre = reinsch_fit(knots, yre, lambda);
    const auto fim = reinsch_fit(knots, yim, lambda);
    auto slice = [&](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + pad, v.end() - pad);
    };
    out.knots = slice(knots);
    out.re_val = slice(fre.value);
    out.re_dd = slice(fre.second);
    out.im_val = slice(fim.value);
    out.im_dd = slice(fim.second);
    double mre = 0.0, mim = 0.0;
    for (int i = pad; i < n_all - pad; ++i) {
        mre += (fre.value[i] - yre[i]) * (fre.value[i] - yre[i]);
        mim += (fim.value[i] - yim[i]) * (fim.value[i] - yim[i]);
    }
    out.fit_mse_re = mre / grid_n;
    out.fit_mse_im = mim / grid_n;
    return out;
}

// ---------------------------------------------------------------------------
// Appendix-style closed form for the partial forward variance (type III).
// ---------------------------------------------------------------------------

namespace {

void check_cut(Complex z, const char* where) {
    if (std::abs(z.imag()) < 1e-8 && z.real() >= 1.0 - 1e-8)
        throw std::runtime_error(std::string(where) + ": hypergeometric argument within 1e-8 of the cut [1, inf)");
}

}  // namespace

Complex cf_partial_forward_variance_closed(double l, const ModelParams& params, const ModelState& state,
                                           double t0, double t, double delta) {
    params.validate();
    state.validate();
    if (params.kernel.family != kernels::Family::TypeIII)
        throw std::invalid_argument("cf_partial_forward_variance_closed: type-III kernel required");
    if (!(t0 >= 0.0 && t0 < t)) throw std::invalid_argument("cf_partial_forward_variance_closed: needs t0 < t");
    if (delta < 0.0) throw std::invalid_argument("cf_partial_forward_variance_closed: delta must be nonnegative");
    if (l == 0.0) return 1.0;

    const auto& ts = params.ts;
    if (ts.c < 1e-12)
        throw std::invalid_argument("cf_partial_forward_variance_closed: needs the tempered-stable c > 0");
    const auto& k = params.kernel;
    const double d = k.d, kappa = k.kappa, tau = k.tau, theta = k.theta;
    const double a = ts.a, b = ts.b, c = ts.c;
    const double tt = t - t0;
    const double xi1 = levy::ts_moments(ts).first;
    const double gd = std::tgamma(d);
    const Complex il = kI * l;
    const double aGc = a * std::tgamma(-c);
    const double bc = std::pow(b, c);

    const Complex A = (b - il * theta * std::exp(-kappa * tau)) * gd + il * std::pow(tau, d - 1.0);

    const auto psi_minus = [&](double s) -> Complex {
        if (s <= 0.0) {
            // limit of the surviving (-v)^{-b} component of s F(v(s)) as s -> 0
            const double cc = d / (d - 1.0), b2 = 1.0 / (d - 1.0);
            const double Kc = std::tgamma(cc) * std::tgamma(-c - b2) / (std::tgamma(-c) * std::tgamma(cc - b2));
            return aGc * std::pow(A / gd, c) * Kc * std::pow(-il / A, 1.0 / (1.0 - d));
        }
        const Complex v = il * std::pow(s, d - 1.0) / A;
        check_cut(v, "cf_partial_forward_variance_closed (power branch)");
        const Complex F = specfun::gauss_2f1(-c, 1.0 / (d - 1.0), d / (d - 1.0), v);
        const Complex lead = il * xi1 * s *
                             ((d * std::pow(tau, d - 1.0) - std::pow(s, d - 1.0)) / std::tgamma(d + 1.0) -
                              theta * std::exp(-kappa * tau));
        return lead + aGc * s * (std::pow(A / gd, c) * F - bc);
    };

    const auto psi_plus = [&](double s) -> Complex {
        const Complex w = b * std::exp(kappa * s) / (il * theta);
        check_cut(w, "cf_partial_forward_variance_closed (exponential branch)");
        const Complex F = specfun::gauss_2f1(1.0, 1.0, 1.0 - c, w);
        const Complex lead = il * a * theta * std::tgamma(1.0 - c) * std::exp(-kappa * s) /
                             (kappa * std::pow(b, 1.0 - c));
        const Complex base = b - il * theta * std::exp(-kappa * s);
        return lead + aGc * (std::exp(kappa * s) * std::pow(base, c + 1.0) / (il * c * kappa * theta) * F -
                             bc * s);
    };

    Complex ex = il * state.i0_sq;
    if (tau > tt + delta) {
        ex += psi_minus(tt + delta) - psi_minus(delta);
    } else {
        const double mid = std::max(tau, delta);
        ex += psi_minus(mid) - psi_minus(delta) + psi_plus(tt + delta) - psi_plus(mid);
    }
    return std::exp(ex);
}

// ---------------------------------------------------------------------------
// Time-changed average forward variance (unconditional).
// ---------------------------------------------------------------------------

Complex cf_timechanged(double l, const ModelParams& params, const kernels::KernelSpec& tc_kernel,
                       const levy::TemperedStableParams& y, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("cf_timechanged: t must be positive");
    if (l == 0.0) return 1.0;

    // time-change CF: φ_T(λ) = exp ∫_0^t log φ_{Y1}(λ ∫_0^{t-s} η) ds
    const int n_u = 96;
    const auto& ru = quad::gauss_rule(n_u);
    std::vector<double> iu(n_u), wu(n_u);
    for (int i = 0; i < n_u; ++i) {
        const double u = 0.5 * t * (1.0 + ru.x[i]);
        iu[i] = kernels::kernel_integral0(tc_kernel, u);
        wu[i] = 0.5 * t * ru.w[i];
    }
    const auto phi_T = [&](double lam) -> Complex {
        Complex s = 0.0;
        for (int i = 0; i < n_u; ++i) s += wu[i] * levy::ts_char_exponent(y, lam * iu[i]);
        return std::exp(s);
    };

    const auto [xi1y, xi2y] = levy::ts_moments(y);
    double mean_T = 0.0, var_T = 0.0;
    for (int i = 0; i < n_u; ++i) {
        mean_T += wu[i] * xi1y * iu[i];
        var_T += wu[i] * xi2y * iu[i] * iu[i];
    }
    const double sd_T = std::sqrt(var_T);

    // λ truncation where |φ_T| underflows
    double lam_max = 1.0;
    while (std::abs(phi_T(lam_max)) > 1e-16 && lam_max < 1e9) lam_max *= 2.0;

    const double y_lo = std::max(mean_T - 10.0 * sd_T, 1e-8);
    const double y_hi = mean_T + 14.0 * sd_T;
    const int n_y = 80;
    const auto& ry = quad::gauss_rule(n_y);

    const quad::OscPanel osc(24);
    Complex total = 0.0;
    for (int iy = 0; iy < n_y; ++iy) {
        const double yv = 0.5 * (y_lo + y_hi) + 0.5 * (y_hi - y_lo) * ry.x[iy];
        const double wy = 0.5 * (y_hi - y_lo) * ry.w[iy];
        // density of T_t at yv by Fourier inversion; φ_T's own drift phase
        // e^{iλ mean_T} goes into the oscillator carrier
        double dens = 0.0;
        const int n_pan = 24;
        for (int p = 0; p < n_pan; ++p) {
            const double a = lam_max * p / n_pan, bb = lam_max * (p + 1) / n_pan;
            const auto pts = osc.points(a, bb);
            std::vector<Complex> vals(pts.size());
            for (std::size_t q = 0; q < pts.size(); ++q)
                vals[q] = phi_T(pts[q]) * std::exp(-kI * (pts[q] * mean_T));
            dens += osc.integrate(vals, a, bb, mean_T - yv).real();
        }
        dens /= M_PI;
        if (dens <= 0.0) continue;

        // conditional factor at the realized horizon yv with the
        // deterministic time-0 state; the ς = 0 probe only carries the
        // kernel integral
        ModelState st;
        st.varsigma = 0.0;
        AvgForwardVarianceCF probe(params, st, 0.0, yv);
        const double xi1 = probe.xi1();
        const double D = params.v0 * (std::exp(-params.kernel.kappa * yv) -
                                      std::exp(-params.kernel.kappa * (yv + params.delta))) /
                             (params.kernel.kappa * params.delta) +
                         params.vbar * (1.0 - (std::exp(-params.kernel.kappa * yv) -
                                               std::exp(-params.kernel.kappa * (yv + params.delta))) /
                                                  (params.kernel.kappa * params.delta));
        st.i0_sq = D + xi1 * kernels::upsilon(params.kernel, params.delta) + xi1 * probe.integrated_H();
        st.varsigma = 0.01;
        AvgForwardVarianceCF cf(params, st, 0.0, yv);
        total += wy * dens * cf.eval(l);
    }
    return total;
}

}  // namespace afv::charfn
