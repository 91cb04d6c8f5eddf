#include "afv/levy.hpp"

#include <cmath>
#include <stdexcept>

namespace afv::levy {

TemperedStableParams::TemperedStableParams(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
    if (!(a > 0.0)) throw std::invalid_argument("TemperedStableParams: a must be positive");
    if (!(b > 0.0)) throw std::invalid_argument("TemperedStableParams: b must be positive");
    if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("TemperedStableParams: c must lie in [0,1)");
}

StableParams::StableParams(double alpha_) : alpha(alpha_) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("StableParams: alpha must lie in (0,2]");
}

Complex ts_char_exponent(const TemperedStableParams& p, Complex l) {
    if (l.imag() <= -p.b)
        throw std::domain_error("ts_char_exponent: Im(l) must exceed -b");
    const Complex I(0.0, 1.0);
    const Complex base = p.b - I * l;  // Re(base) = b + Im(l) > 0
    if (p.c < 1e-12) {
        return -p.a * std::log(1.0 - I * l / p.b);  // gamma-process limit
    }
    return p.a * std::tgamma(-p.c) * (std::pow(base, p.c) - std::pow(p.b, p.c));
}

std::pair<double, double> ts_moments(const TemperedStableParams& p) {
    const double xi1 = p.a * std::tgamma(1.0 - p.c) / std::pow(p.b, 1.0 - p.c);
    const double xi2 = p.a * std::tgamma(2.0 - p.c) / std::pow(p.b, 2.0 - p.c);
    return {xi1, xi2};
}

double stable_char(const StableParams& p, double l, double t) {
    if (t < 0.0) throw std::domain_error("stable_char: t must be nonnegative");
    return std::exp(-t * std::pow(std::abs(l), p.alpha));
}

namespace {

// Michael-Schucany-Haas inverse Gaussian sampler, IG(mu, lambda).
double sample_inverse_gaussian(double mu, double lambda, RandomStream& rng) {
    const double nu = rng.gauss();
    const double y = nu * nu;
    const double x = mu + 0.5 * mu * mu * y / lambda -
                     0.5 * mu / lambda * std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
    if (rng.uniform() <= mu / (mu + x)) return x;
    return mu * mu / x;
}

}  // namespace

double sample_onesided_stable(double c, RandomStream& rng) {
    // Kanter: S = (A(U)/E)^{(1-c)/c} with Zolotarev's function A on (0, π)
    const double u = M_PI * rng.uniform();
    const double e = rng.exponential();
    const double A = std::pow(std::sin(c * u), c / (1.0 - c)) * std::sin((1.0 - c) * u) /
                     std::pow(std::sin(u), 1.0 / (1.0 - c));
    return std::pow(A / e, (1.0 - c) / c);
}

double sample_ts_increment(const TemperedStableParams& p, double dt, RandomStream& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_ts_increment: dt must be positive");
    if (p.c < 1e-12) {
        return rng.gamma(p.a * dt, 1.0 / p.b);
    }
    if (std::abs(p.c - 0.5) < 1e-14) {
        // exact: tempered stable with c = 1/2 is IG(a√π dt/√b, 2 a² π dt²)
        const double mu = p.a * std::sqrt(M_PI) * dt / std::sqrt(p.b);
        const double lambda = 2.0 * p.a * p.a * M_PI * dt * dt;
        return sample_inverse_gaussian(mu, lambda, rng);
    }
    // Baeumer-Meerschaert: propose S from the untempered one-sided stable law
    // with Laplace exponent dt·a|Γ(-c)|λ^c, accept with probability e^{-bS}.
    const double scale = std::pow(dt * p.a * std::abs(std::tgamma(-p.c)), 1.0 / p.c);
    for (;;) {
        const double s = scale * sample_onesided_stable(p.c, rng);
        if (rng.uniform() <= std::exp(-p.b * s)) return s;
    }
}

double sample_stable_increment(const StableParams& p, double dt, RandomStream& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_stable_increment: dt must be positive");
    const double alpha = p.alpha;
    const double scale = std::pow(dt, 1.0 / alpha);
    if (alpha == 2.0) {
        return scale * std::sqrt(2.0) * rng.gauss();  // CF e^{-l²} has variance 2
    }
    if (alpha == 1.0) {
        return scale * std::tan(M_PI * (rng.uniform() - 0.5));
    }
    // Chambers-Mallows-Stuck, symmetric case
    const double u = M_PI * (rng.uniform() - 0.5);
    const double e = rng.exponential();
    const double z = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha) *
                     std::pow(std::cos((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
    return scale * z;
}

}  // namespace afv::levy
