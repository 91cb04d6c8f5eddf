#include "afv/kernels.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "afv/specfun.hpp"

namespace afv::kernels {

namespace {

using Complex = std::complex<double>;

void check_common(double kappa, double d) {
    if (!(kappa > 0.0)) throw std::invalid_argument("KernelSpec: kappa must be positive");
    if (!(d > 0.5)) throw std::invalid_argument("KernelSpec: d must exceed 1/2");
}

// real x on the negative axis enters through complex incomplete gammas; the
// assembled kernel values are real up to roundoff
double take_real(Complex z, const char* what) {
    if (std::abs(z.imag()) > 1e-9 * std::max(1.0, std::abs(z.real())))
        throw std::runtime_error(std::string(what) + ": imaginary residual above tolerance");
    return z.real();
}

Complex neg_pow(double x, double p) {
    // principal branch with arg(-x) = +π
    return std::pow(Complex(-x, 0.0), p);
}

double gamma_upper_real(double s, double x) {
    return specfun::upper_incomplete_gamma(s, Complex(x, 0.0)).real();
}

double gamma_lower_real(double s, double x) {
    return specfun::lower_incomplete_gamma(s, Complex(x, 0.0)).real();
}

// ---- type I ---------------------------------------------------------------

double h1(const KernelSpec& k, double u) {
    return std::exp(-k.kappa * u) * std::pow(u, k.d - 1.0) / std::tgamma(k.d);
}

double int0_1(const KernelSpec& k, double x) {
    return gamma_lower_real(k.d, k.kappa * x) / (std::pow(k.kappa, k.d) * std::tgamma(k.d));
}

double H1(const KernelSpec& k, double delta, double u) {
    const double y1 = k.kappa * u, y2 = k.kappa * (u + delta);
    double diff;
    if (y2 < k.d + 1.0) {
        diff = gamma_lower_real(k.d, y2) - gamma_lower_real(k.d, y1);
    } else {
        diff = gamma_upper_real(k.d, y1) - gamma_upper_real(k.d, y2);
    }
    return diff / (std::pow(k.kappa, k.d) * delta * std::tgamma(k.d));
}

double upsilon1(const KernelSpec& k, double delta) {
    const double y = k.kappa * delta;
    if (y <= 10.0) {
        // Υ = (Δ^d/Γ(d)) Σ (-κΔ)^n / (n! (d+n)(d+n+1)); avoids the large-y
        // cancellation of the closed form at small κΔ
        double term = 1.0, sum = 0.0;
        for (int n = 0; n < 120; ++n) {
            const double add = term / ((k.d + n) * (k.d + n + 1.0));
            sum += add;
            term *= -y / (n + 1.0);
            if (std::abs(term) < 1e-18 * std::abs(sum) && n > y) break;
        }
        return std::pow(delta, k.d) * sum / std::tgamma(k.d);
    }
    const double gd = std::tgamma(k.d);
    const double num = (y - k.d) * gd - y * gamma_upper_real(k.d, y) + gamma_upper_real(k.d + 1.0, y);
    return num / (std::pow(k.kappa, k.d + 1.0) * delta * gd);
}

// ---- type II --------------------------------------------------------------

Complex gamma_lower_neg(double d, double x) {
    // γ(d, -x) for x >= 0, principal branch
    return specfun::lower_incomplete_gamma(d, Complex(-x, 0.0));
}

double h2(const KernelSpec& k, double u) {
    const double gd = std::tgamma(k.d);
    const Complex v = std::pow(u, k.d - 1.0) +
                      neg_pow(k.kappa, 1.0 - k.d) * std::exp(-k.kappa * u) * gamma_lower_neg(k.d, k.kappa * u);
    return take_real(v / gd, "type-II kernel");
}

Complex int0_2_complex(const KernelSpec& k, double x) {
    // ∫_0^x h = (-κ)^{-d} e^{-κx} γ(d, -κx) / Γ(d)
    return neg_pow(k.kappa, -k.d) * std::exp(-k.kappa * x) * gamma_lower_neg(k.d, k.kappa * x) / std::tgamma(k.d);
}

double int0_2(const KernelSpec& k, double x) { return take_real(int0_2_complex(k, x), "type-II integral"); }

double H2(const KernelSpec& k, double delta, double u) {
    const Complex v = (int0_2_complex(k, u + delta) - int0_2_complex(k, u)) / delta;
    return take_real(v, "type-II integrated kernel");
}

double upsilon2(const KernelSpec& k, double delta) {
    const Complex v = (std::pow(delta, k.d) / k.d -
                       neg_pow(k.kappa, -k.d) * std::exp(-k.kappa * delta) * gamma_lower_neg(k.d, k.kappa * delta)) /
                      (delta * std::tgamma(k.d) * k.kappa);
    return take_real(v, "type-II averaging constant");
}

// ---- type III -------------------------------------------------------------

double h3_minus(const KernelSpec& k, double u) {
    return (std::pow(u, k.d - 1.0) - std::pow(k.tau, k.d - 1.0)) / std::tgamma(k.d) +
           k.theta * std::exp(-k.kappa * k.tau);
}

double h3(const KernelSpec& k, double u) {
    if (u < k.tau) return h3_minus(k, u);
    return k.theta * std::exp(-k.kappa * u);
}

double int0_3(const KernelSpec& k, double x) {
    const double gd = std::tgamma(k.d);
    const double he = k.theta * std::exp(-k.kappa * k.tau);
    if (x <= k.tau)
        return (std::pow(x, k.d) / k.d - x * std::pow(k.tau, k.d - 1.0)) / gd + x * he;
    const double at_tau = (std::pow(k.tau, k.d) / k.d - std::pow(k.tau, k.d)) / gd + k.tau * he;
    return at_tau + k.theta * (std::exp(-k.kappa * k.tau) - std::exp(-k.kappa * x)) / k.kappa;
}

double H3(const KernelSpec& k, double delta, double u) {
    const double gd = std::tgamma(k.d);
    const double he = k.theta * std::exp(-k.kappa * k.tau);
    const double tp = std::pow(k.tau, k.d - 1.0);
    if (u + delta < k.tau) {
        return ((std::pow(u + delta, k.d) - std::pow(u, k.d)) / k.d - delta * tp) / (delta * gd) + he;
    }
    if (u < k.tau) {
        const double left = ((std::pow(k.tau, k.d) - std::pow(u, k.d)) / k.d - (k.tau - u) * tp) / gd +
                            (k.tau - u) * he;
        const double right = k.theta * (std::exp(-k.kappa * k.tau) - std::exp(-k.kappa * (u + delta))) / k.kappa;
        return (left + right) / delta;
    }
    return k.theta * (std::exp(-k.kappa * u) - std::exp(-k.kappa * (u + delta))) / (k.kappa * delta);
}

double upsilon3(const KernelSpec& k, double delta) {
    const double gd = std::tgamma(k.d);
    const double he = k.theta * std::exp(-k.kappa * k.tau);
    const double tp = std::pow(k.tau, k.d - 1.0);
    if (delta <= k.tau) {
        return (std::pow(delta, k.d) / (k.d * (k.d + 1.0)) - 0.5 * delta * tp) / gd + 0.5 * delta * he;
    }
    const double i_tau = (std::pow(k.tau, k.d) / k.d - std::pow(k.tau, k.d)) / gd + k.tau * he;
    const double part1 = (std::pow(k.tau, k.d + 1.0) / (k.d * (k.d + 1.0)) - 0.5 * k.tau * k.tau * tp) / gd +
                         0.5 * k.tau * k.tau * he;
    const double part2 = (delta - k.tau) * i_tau +
                         he * (delta - k.tau) / k.kappa -
                         k.theta * (std::exp(-k.kappa * k.tau) - std::exp(-k.kappa * delta)) / (k.kappa * k.kappa);
    return (part1 + part2) / delta;
}

}  // namespace

KernelSpec KernelSpec::type1(double kappa, double d) {
    check_common(kappa, d);
    return {Family::TypeI, kappa, d, 0.0, 0.0};
}

KernelSpec KernelSpec::type2(double kappa, double d) {
    check_common(kappa, d);
    if (!(d <= 1.0)) throw std::invalid_argument("KernelSpec: type II needs d in (1/2, 1]");
    return {Family::TypeII, kappa, d, 0.0, 0.0};
}

KernelSpec KernelSpec::type3(double kappa, double d) {
    check_common(kappa, d);
    if (!(d < 1.0)) throw std::invalid_argument("KernelSpec: type III needs d in (1/2, 1)");
    const double tau = (1.0 - d) / kappa;
    const double theta = -std::pow(M_E * kappa, 1.0 - d) /
                         (std::pow(1.0 - d, 2.0 - d) * std::tgamma(d - 1.0));
    return {Family::TypeIII, kappa, d, tau, theta};
}

KernelSpec KernelSpec::type3_general(double kappa, double d, double theta, int branch) {
    check_common(kappa, d);
    if (!(d < 1.0)) throw std::invalid_argument("KernelSpec: type III needs d in (1/2, 1)");
    if (!(theta > 0.0)) throw std::invalid_argument("KernelSpec: type III needs theta > 0");
    const double tau = solve_tau(kappa, d, theta, branch);
    return {Family::TypeIII, kappa, d, tau, theta};
}

double solve_tau(double kappa, double d, double theta, int branch) {
    if (!(d > 0.5 && d < 1.0)) throw std::invalid_argument("solve_tau: d in (1/2,1)");
    const double bound = -std::pow((2.0 - d) / (M_E * kappa), d - 2.0) / (kappa * std::tgamma(d - 1.0));
    if (theta < bound * (1.0 - 1e-12))
        throw std::domain_error("solve_tau: theta violates the solvability bound");
    const double rhs = -kappa * theta * std::tgamma(d - 1.0);  // positive
    const double m = d - 2.0;
    double arg = kappa / m * std::pow(rhs, 1.0 / m);
    // clip roundoff excursions below the W branch point at -1/e
    if (arg < -1.0 / M_E) arg = -1.0 / M_E;
    const double tau = m / kappa * specfun::lambert_w(branch, arg);
    if (!(tau > 0.0)) throw std::runtime_error("solve_tau: no positive solution");
    return tau;
}

double kernel_eval(const KernelSpec& k, double u) {
    if (!(u > 0.0)) throw std::domain_error("kernel_eval: u must be positive");
    switch (k.family) {
        case Family::TypeI: return h1(k, u);
        case Family::TypeII: return h2(k, u);
        case Family::TypeIII: return h3(k, u);
    }
    throw std::logic_error("kernel_eval: unreachable");
}

double kernel_integral0(const KernelSpec& k, double x) {
    if (x < 0.0) throw std::domain_error("kernel_integral0: x must be nonnegative");
    if (x == 0.0) return 0.0;
    switch (k.family) {
        case Family::TypeI: return int0_1(k, x);
        case Family::TypeII: return int0_2(k, x);
        case Family::TypeIII: return int0_3(k, x);
    }
    throw std::logic_error("kernel_integral0: unreachable");
}

double integrated_kernel(const KernelSpec& k, double delta, double u) {
    if (!(delta > 0.0)) throw std::domain_error("integrated_kernel: delta must be positive");
    if (u < 0.0) throw std::domain_error("integrated_kernel: u must be nonnegative");
    switch (k.family) {
        case Family::TypeI: return H1(k, delta, u);
        case Family::TypeII: return H2(k, delta, u);
        case Family::TypeIII: return H3(k, delta, u);
    }
    throw std::logic_error("integrated_kernel: unreachable");
}

double upsilon(const KernelSpec& k, double delta) {
    if (!(delta > 0.0)) throw std::domain_error("upsilon: delta must be positive");
    switch (k.family) {
        case Family::TypeI: return upsilon1(k, delta);
        case Family::TypeII: return upsilon2(k, delta);
        case Family::TypeIII: return upsilon3(k, delta);
    }
    throw std::logic_error("upsilon: unreachable");
}

double short_term_constant(const KernelSpec& k) {
    if (k.d > 0.999) throw std::domain_error("short_term_constant: diverges as d approaches 1");
    if (!(k.d > 0.5)) throw std::domain_error("short_term_constant: d in (1/2,1)");
    return std::tgamma(1.0 - 2.0 * k.d) * std::sin(M_PI * k.d) / (M_PI * std::pow(std::tgamma(k.d), 2.0));
}

std::pair<double, double> short_term_band(const KernelSpec& k, double t) {
    const double c = short_term_constant(k);
    return {c * std::exp(-2.0 * k.kappa * t), c};
}

}  // namespace afv::kernels
