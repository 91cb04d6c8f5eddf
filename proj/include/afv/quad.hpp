#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace afv::quad {

// Gauss-Legendre rule on [-1, 1]. Rules are computed once per node count and
// cached for the lifetime of the process.
struct GaussRule {
    std::vector<double> x;  // nodes, ascending
    std::vector<double> w;  // weights
};

const GaussRule& gauss_rule(int n);

// ∫_a^b f(x) dx with a fixed n-node rule.
template <class F>
double gauss(const F& f, double a, double b, int n) {
    const GaussRule& r = gauss_rule(n);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + h * r.x[i]);
    return h * s;
}

template <class F>
std::complex<double> gauss_complex(const F& f, double a, double b, int n) {
    const GaussRule& r = gauss_rule(n);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + h * r.x[i]);
    return h * s;
}

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;   // a-posteriori estimate
    int panels = 0;
};

// Adaptive bisection with a 15/31-node error estimate per panel.
AdaptiveResult adaptive(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol = 1e-12, int max_depth = 32);

// Spherical Bessel function j_n(x), x >= 0. Upward recurrence below the
// turning point, Miller-style downward recurrence above it.
double sph_bessel_j(int n, double x);

// Ordinary Bessel J_0..J_kmax at x >= 0 in one sweep (upward recurrence when
// x dominates the orders, Miller normalization otherwise).
std::vector<double> bessel_j_array(int kmax, double x);

// Legendre-moment (Filon-type) integral of s(l)·e^{iωl} over [a, b].
// The slow factor s is sampled at a Gauss grid, projected on Legendre
// polynomials, and each mode is integrated against the oscillator exactly via
// ∫_{-1}^{1} P_n(x) e^{iθx} dx = 2 i^n j_n(θ).
class OscPanel {
  public:
    explicit OscPanel(int nodes = 24);

    // Sample points of the slow factor for panel [a,b].
    std::vector<double> points(double a, double b) const;

    // Integral given slow-factor values at points(a,b); also reports the
    // relative size of the trailing Legendre coefficients (resolution check).
    std::complex<double> integrate(const std::vector<std::complex<double>>& s_vals,
                                   double a, double b, double omega,
                                   double* coeff_tail = nullptr) const;

    int nodes() const { return n_; }

  private:
    int n_;
    const GaussRule* rule_;
    std::vector<double> legendre_;  // P_k(x_i), row-major [k][i]
};

}  // namespace afv::quad
