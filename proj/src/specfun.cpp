#include "afv/specfun.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "afv/quad.hpp"

namespace afv::specfun {

namespace {

constexpr double kInvE = 0.36787944117144233;  // 1/e

bool near_nonpositive_integer(double x, double tol = 1e-12) {
    if (x > 0.5) return false;
    return std::abs(x - std::round(x)) < tol;
}

Complex cpow_principal(Complex base, double expo) {
    return std::exp(expo * std::log(base));
}

}  // namespace

// ---------------------------------------------------------------------------
// Lambert W
// ---------------------------------------------------------------------------

double lambert_w(int branch, double x) {
    if (branch != 0 && branch != -1)
        throw std::domain_error("lambert_w: branch must be 0 or -1");
    const double xmin = -kInvE;
    if (x < xmin - 1e-15)
        throw std::domain_error("lambert_w: x below -1/e");
    if (branch == -1 && x >= 0.0)
        throw std::domain_error("lambert_w: branch -1 needs x < 0");
    if (x == 0.0) return 0.0;
    if (std::abs(x - xmin) < 4e-17) return -1.0;

    double w;
    const double p2 = 2.0 * (M_E * x + 1.0);
    const double p = (branch == 0) ? std::sqrt(std::max(p2, 0.0)) : -std::sqrt(std::max(p2, 0.0));
    if (branch == 0) {
        if (x < -0.25)
            w = -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0;
        else if (x < 2.0)
            w = x * (1.0 - x + 1.5 * x * x) / (1.0 + 0.5 * x);  // crude Padé-ish start
        else {
            const double l1 = std::log(x), l2 = std::log(l1);
            w = l1 - l2 + l2 / l1;
        }
    } else {
        if (x < -0.25)
            w = -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0;
        else {
            const double l1 = std::log(-x), l2 = std::log(-l1);
            w = l1 - l2 + l2 / l1;
        }
    }

    for (int it = 0; it < 100; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        const double dw = f / denom;  // Halley step
        w -= dw;
        if (std::abs(dw) < 1e-15 * (1.0 + std::abs(w))) break;
    }
    // keep the branch ranges exact at the boundary
    if (branch == 0 && w < -1.0) w = -1.0;
    if (branch == -1 && w > -1.0) w = -1.0;
    return w;
}

// ---------------------------------------------------------------------------
// Incomplete gamma
// ---------------------------------------------------------------------------

namespace {

// Series for γ(s, z): z^s e^{-z} Σ_k z^k Γ(s)/Γ(s+1+k); stable for |z| < s+1.
Complex gamma_lower_series(double s, Complex z) {
    Complex sum = 1.0 / s, term = sum;
    for (int k = 1; k < 600; ++k) {
        term *= z / (s + k);
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return cpow_principal(z, s) * std::exp(-z) * sum;
}

// Alternating series γ(s, z) = z^s Σ_k (-z)^k / (k! (s+k)); all terms carry
// the same sign for z on the negative real axis (type-II kernel arguments).
Complex gamma_lower_alternating(double s, Complex z) {
    Complex sum = 1.0 / s, term(1.0, 0.0);
    for (int k = 1; k < 600; ++k) {
        term *= -z / static_cast<double>(k);
        const Complex add = term / (s + k);
        sum += add;
        if (std::abs(add) < 1e-17 * std::abs(sum) && k > std::abs(z)) break;
    }
    return cpow_principal(z, s) * sum;
}

// Modified Lentz continued fraction for Γ(s, z); standard region |z| >= s+1
// with Re z not far into the left half-plane.
Complex gamma_upper_cf(double s, Complex z) {
    const double tiny = 1e-300;
    Complex b = z + 1.0 - s;
    Complex c = 1.0 / tiny;
    Complex d = 1.0 / b;
    Complex h = d;
    for (int i = 1; i < 2000; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const Complex delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-z) * cpow_principal(z, s) * h;
}

// Asymptotic expansion Γ(s, z) ~ z^{s-1} e^{-z} Σ (s-1)(s-2)... / z^k,
// usable for |z| well above |s|.
Complex gamma_upper_asymptotic(double s, Complex z) {
    Complex sum(1.0, 0.0), term(1.0, 0.0);
    double prev = std::numeric_limits<double>::max();
    for (int k = 1; k < 60; ++k) {
        term *= (s - k) / z;
        const double mag = std::abs(term);
        if (mag > prev) break;  // divergence onset
        sum += term;
        prev = mag;
        if (mag < 1e-17 * std::abs(sum)) break;
    }
    return cpow_principal(z, s - 1.0) * std::exp(-z) * sum;
}

Complex gamma_upper_positive_s(double s, Complex z) {
    const double az = std::abs(z);
    if (az == 0.0) return std::tgamma(s);
    if (az < s + 1.0) return std::tgamma(s) - gamma_lower_series(s, z);
    if (az > 40.0 + 2.5 * std::abs(s)) return gamma_upper_asymptotic(s, z);
    if (z.real() >= -0.3 * az) return gamma_upper_cf(s, z);
    // left half-plane, moderate modulus: the alternating series has no
    // cancellation there
    return std::tgamma(s) - gamma_lower_alternating(s, z);
}

}  // namespace

Complex upper_incomplete_gamma(double s, Complex z) {
    if (z == 0.0) {
        if (s <= 0.0) throw std::domain_error("upper_incomplete_gamma: z = 0 with s <= 0");
        return std::tgamma(s);
    }
    if (s > 0.0) {
        const Complex g = gamma_upper_positive_s(s, z);
        if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
            throw std::overflow_error("upper_incomplete_gamma: overflow");
        return g;
    }
    // s <= 0: the downward recurrence amplifies roundoff by ~|z/s| per step,
    // so route moderate and large |z| through the continued fraction and the
    // asymptotic series instead.
    const double az = std::abs(z);
    Complex g;
    if (az > 40.0 + 2.5 * std::abs(s)) {
        g = gamma_upper_asymptotic(s, z);
    } else if (az >= 1.0 && z.real() >= -0.2 * az) {
        g = gamma_upper_cf(s, z);
    } else {
        const int k = static_cast<int>(std::ceil(-s)) + 1;
        g = gamma_upper_positive_s(s + k, z);
        const Complex emz = std::exp(-z);
        for (int j = k - 1; j >= 0; --j) {
            const double sj = s + j;
            g = (g - cpow_principal(z, sj) * emz) / sj;
        }
    }
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
        throw std::overflow_error("upper_incomplete_gamma: overflow in recurrence");
    return g;
}

Complex lower_incomplete_gamma(double s, Complex z) {
    if (s <= 0.0) throw std::domain_error("lower_incomplete_gamma: needs s > 0");
    if (z == 0.0) return 0.0;
    const double az = std::abs(z);
    if (az < s + 1.0) return gamma_lower_series(s, z);
    if (z.real() < 0.0 && az <= 60.0) return gamma_lower_alternating(s, z);
    return std::tgamma(s) - upper_incomplete_gamma(s, z);
}

// ---------------------------------------------------------------------------
// Gauss 2F1
// ---------------------------------------------------------------------------

namespace {

constexpr int k2f1MaxTerms = 6000;

Complex hyp2f1_series(double a, double b, double c, Complex z, bool* ok) {
    Complex term(1.0, 0.0), sum(1.0, 0.0);
    *ok = false;
    for (int k = 0; k < k2f1MaxTerms; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if (std::abs(term) < 1e-16 * (1.0 + std::abs(sum))) {
            *ok = true;
            break;
        }
    }
    return sum;
}

// 2F1(1, 1; 1-c; w) through the Pfaff map u = w/(w-1) and the Lerch-type
// series Σ u^k/(k-c) = -Log(1-u) + c Σ u^k/(k(k-c)). Valid whenever |u| < 1,
// which covers the whole half-plane Re w < 1/2 including large |w| on the
// imaginary axis.
Complex hyp2f1_one_one(double cparam, Complex w, bool* ok) {
    const double c = 1.0 - cparam;  // F(1,1;1-c;w) convention with 1-c = cparam
    const Complex u = w / (w - 1.0);
    const double au = std::abs(u);
    *ok = false;
    if (au >= 1.0 - 1e-9) return 0.0;
    Complex tail(0.0, 0.0), up(1.0, 0.0);
    // Σ u^k/(k(k-c)) converges like |u|^k/k², cheap even close to |u| = 1
    const int kmax = au < 0.9 ? 400 : static_cast<int>(std::min(2.5e6, 50.0 / -std::log(au))) + 50;
    for (int k = 1; k <= kmax; ++k) {
        up *= u;
        const Complex add = up / (static_cast<double>(k) * (k - c));
        tail += add;
        if (std::abs(add) < 1e-17 * (1.0 + std::abs(tail)) && k > 8) break;
    }
    const Complex S = -std::log(1.0 - u) + c * tail;
    *ok = true;
    return (1.0 - c * S) / (1.0 - w);
}

}  // namespace

Complex gauss_2f1(double a, double b, double c, Complex z) {
    if (near_nonpositive_integer(c))
        throw std::domain_error("gauss_2f1: c is a non-positive integer");
    if (z == 0.0) return 1.0;
    if (a == 0.0 || b == 0.0) return 1.0;

    bool ok = false;
    const double az = std::abs(z);

    if (az < 0.92) {
        const Complex s = hyp2f1_series(a, b, c, z, &ok);
        if (ok) return s;
    }

    // Pfaff transformation z -> z/(z-1); shrinks the argument whenever
    // Re z < 1/2. Pick the parameter (a or b) giving a terminating-friendly
    // series.
    const Complex u = z / (z - 1.0);
    if (std::abs(u) < 0.92) {
        const Complex s1 = hyp2f1_series(a, c - b, c, u, &ok);
        if (ok) return cpow_principal(1.0 - z, -a) * s1;
        const Complex s2 = hyp2f1_series(b, c - a, c, u, &ok);
        if (ok) return cpow_principal(1.0 - z, -b) * s2;
    }

    // a = b = 1 is the degenerate case for the 1/z continuation; use the
    // dedicated Lerch form.
    if (a == 1.0 && b == 1.0) {
        const Complex s = hyp2f1_one_one(c, z, &ok);
        if (ok) return s;
    }

    const double cab = c - a - b;
    if (std::abs(1.0 - z) < 0.92 && !near_nonpositive_integer(-std::abs(cab)) &&
        std::abs(cab - std::round(cab)) > 1e-10) {
        // DLMF 15.8.4, c-a-b not an integer
        const Complex w = 1.0 - z;
        const Complex t1 = std::tgamma(c) * std::tgamma(cab) / (std::tgamma(c - a) * std::tgamma(c - b)) *
                           hyp2f1_series(a, b, 1.0 - cab, w, &ok);
        if (ok) {
            bool ok2 = false;
            const Complex t2 = std::tgamma(c) * std::tgamma(-cab) / (std::tgamma(a) * std::tgamma(b)) *
                               cpow_principal(w, cab) * hyp2f1_series(c - a, c - b, 1.0 + cab, w, &ok2);
            if (ok2) return t1 + t2;
        }
    }

    const double ab = a - b;
    if (az > 1.05 && std::abs(ab - std::round(ab)) > 1e-10) {
        // DLMF 15.8.2, a-b not an integer, |arg(-z)| < π
        const Complex zi = 1.0 / z;
        bool ok2 = false;
        const Complex f1 = hyp2f1_series(a, a - c + 1.0, a - b + 1.0, zi, &ok);
        const Complex f2 = hyp2f1_series(b, b - c + 1.0, b - a + 1.0, zi, &ok2);
        if (ok && ok2) {
            const Complex t1 = std::tgamma(c) * std::tgamma(b - a) / (std::tgamma(b) * std::tgamma(c - a)) *
                               cpow_principal(-z, -a) * f1;
            const Complex t2 = std::tgamma(c) * std::tgamma(a - b) / (std::tgamma(a) * std::tgamma(c - b)) *
                               cpow_principal(-z, -b) * f2;
            return t1 + t2;
        }
    }

    throw std::domain_error("gauss_2f1: argument/parameter combination not reachable by the implemented transformations (a=" +
                            std::to_string(a) + ", b=" + std::to_string(b) + ", c=" + std::to_string(c) + ", |z|=" +
                            std::to_string(az) + ")");
}

// ---------------------------------------------------------------------------
// Symmetric stable density
// ---------------------------------------------------------------------------

namespace {

// Tail series f(x) ~ (1/π) Σ_k (-1)^{k+1} Γ(αk+1)/k! sin(kπα/2) t^k x^{-αk-1}.
// Convergent for α < 1, asymptotic for α > 1; usable once t/x^α is small.
bool stable_tail_series(double x, double t, double alpha, int kmax, double* out) {
    double sum = 0.0, prev = std::numeric_limits<double>::max();
    double tk = 1.0, fact = 1.0;
    for (int k = 1; k <= kmax; ++k) {
        tk *= t;
        fact *= k;
        const double term = (k % 2 == 1 ? 1.0 : -1.0) * std::tgamma(alpha * k + 1.0) / fact *
                            std::sin(0.5 * k * M_PI * alpha) * tk * std::pow(x, -alpha * k - 1.0);
        if (std::abs(term) > prev) return false;  // asymptotic series turned
        sum += term;
        prev = std::abs(term);
        if (prev < 1e-16 * std::max(std::abs(sum), 1e-300)) break;
    }
    if (prev > 1e-12 * std::max(std::abs(sum), 1e-300) && prev > 1e-18) return false;
    *out = sum / M_PI;
    return true;
}

double stable_density_quadrature(double x, double t, double alpha) {
    const double ax = std::abs(x);
    const double lmax = std::pow(37.0 / t, 1.0 / alpha);  // e^{-37} underflow cut
    const auto f = [&](double l) { return std::cos(l * ax) * std::exp(-t * std::pow(l, alpha)); };
    // panels bounded by a quarter oscillation period and by the decay scale
    const double osc_h = ax > 1e-12 ? 0.5 * M_PI / ax : lmax;
    const double h = std::max(std::min(osc_h, lmax / 48.0), lmax * 1e-5);
    double sum = 0.0, a = 0.0;
    while (a < lmax) {
        const double b = std::min(a + h, lmax);
        sum += quad::gauss(f, a, b, 16);
        a = b;
    }
    return sum / M_PI;
}

}  // namespace

double stable_density(double x, double t, double alpha) {
    if (t <= 0.0) throw std::domain_error("stable_density: t must be positive");
    if (alpha <= 0.0 || alpha > 2.0) throw std::domain_error("stable_density: alpha in (0,2]");
    const double ax = std::abs(x);
    if (alpha == 2.0) {
        // e^{-t l^2} inverts to a Gaussian with variance 2t
        return std::exp(-ax * ax / (4.0 * t)) / (2.0 * std::sqrt(M_PI * t));
    }
    if (alpha == 1.0) {
        return t / (M_PI * (t * t + ax * ax));  // Cauchy
    }
    if (ax > 1e-3) {
        const double r = t / std::pow(ax, alpha);
        if (r < 2e-3) {
            double v;
            if (stable_tail_series(ax, t, alpha, 24, &v)) return std::max(v, 0.0);
        }
    }
    return std::max(stable_density_quadrature(ax, t, alpha), 0.0);
}

double stable_tail_mass(double x, double t, double alpha) {
    if (x <= 0.0) throw std::domain_error("stable_tail_mass: needs x > 0");
    if (alpha == 2.0) return 0.5 * std::erfc(x / (2.0 * std::sqrt(t)));
    if (alpha == 1.0) return 0.5 - std::atan(x / t) / M_PI;
    const double r = t / std::pow(x, alpha);
    if (r < 2e-3) {
        // integrate the tail series term-wise: ∫_x^∞ y^{-αk-1} dy = x^{-αk}/(αk)
        double sum = 0.0, tk = 1.0, fact = 1.0, prev = std::numeric_limits<double>::max();
        for (int k = 1; k <= 24; ++k) {
            tk *= t;
            fact *= k;
            const double term = (k % 2 == 1 ? 1.0 : -1.0) * std::tgamma(alpha * k + 1.0) / fact *
                                std::sin(0.5 * k * M_PI * alpha) * tk * std::pow(x, -alpha * k) / (alpha * k);
            if (std::abs(term) > prev) break;
            sum += term;
            prev = std::abs(term);
            if (prev < 1e-16 * std::max(sum, 1e-300)) break;
        }
        return std::max(sum / M_PI, 0.0);
    }
    // modest x: 1/2 - ∫_0^x f
    const auto f = [&](double y) { return stable_density(y, t, alpha); };
    const auto r2 = quad::adaptive(f, 0.0, x, 1e-13, 1e-11);
    return std::max(0.5 - r2.value, 0.0);
}

}  // namespace afv::specfun
