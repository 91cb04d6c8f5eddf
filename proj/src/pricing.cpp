#include "afv/pricing.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "afv/quad.hpp"
#include "afv/specfun.hpp"

namespace afv::pricing {

namespace {

const Complex kI(0.0, 1.0);

double real_binom(double p, int k) {
    double out = 1.0;
    for (int j = 1; j <= k; ++j) out *= (p - j + 1.0) / j;
    return out;
}

// (il)^e on the principal branch for l > 0.
Complex il_pow(double l, double e) {
    return std::pow(l, e) * std::exp(kI * (0.5 * M_PI * e));
}

// Σ_{n>=0} (-z)^n / (n! (s+n)); equals γ(s,z) z^{-s} and stays regular for
// any non-pole s, which the small-l evaluation of Γ(s, iκl)(il)^{-s} needs.
Complex gamma_star_series(double s, Complex z) {
    Complex term(1.0, 0.0), sum = 1.0 / s;
    for (int n = 1; n < 400; ++n) {
        term *= -z / static_cast<double>(n);
        const Complex add = term / (s + n);
        sum += add;
        if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Semi-infinite oscillatory integration: a cancellation-aware panel on [0, 1]
// plus Filon panels with dyadic growth capped so that the slow factor stays
// Legendre-resolvable.
// ---------------------------------------------------------------------------

struct TailPiece {
    std::function<Complex(double)> slow;  // slowly varying factor at l >= 1
    double omega;                          // carrier frequency
    double noise = 0.0;                    // relative noise floor of slow()
};

class TailIntegrator {
  public:
    explicit TailIntegrator(double h_max = 2048.0) : h_max_(h_max), panel_(24) {}

    // ∫_{start}^∞ slow(l) e^{iωl} dl summed over the supplied pieces.
    // Power-law remainders close with two integration-by-parts terms once
    // every carrier is genuinely oscillatory.
    Complex integrate(const std::vector<TailPiece>& pieces, double* err_out, double start = 1.0) const {
        Complex total = 0.0;
        double err = 0.0;
        double a = start;
        int quiet = 0;
        double scale = 0.0;
        for (int iter = 0; iter < 4000; ++iter) {
            const double h = std::min(std::max(a, 1.0), h_max_);
            const double b = a + h;
            Complex contrib = 0.0;
            for (const auto& pc : pieces) contrib += panel_integral(pc, a, b, 0, &err);
            total += contrib;
            scale = std::max(scale, std::abs(total));

            double closure_err = 0.0;
            bool closable = iter >= 6;
            Complex closure = 0.0;
            if (closable) {
                for (const auto& pc : pieces) {
                    if (std::abs(pc.omega) < 1e-4) {
                        closable = false;
                        break;
                    }
                    const Complex iw(0.0, pc.omega);
                    // wide stencil: the slow factors vary on O(b) scales, and
                    // a narrow step would amplify their noise floor
                    const double hfd = std::max(0.02 * b, 1.0);
                    const Complex sb = pc.slow(b);
                    const Complex sup = pc.slow(b + hfd), sdn = pc.slow(b - hfd);
                    const Complex sp = (sup - sdn) / (2.0 * hfd);
                    const Complex spp = (sup - 2.0 * sb + sdn) / (hfd * hfd);
                    const Complex c = -std::exp(iw * b) * (sb / iw - sp / (iw * iw));
                    closure += c;
                    // the first omitted integration-by-parts term bounds the
                    // closure error
                    closure_err += std::abs(spp / (iw * iw * iw)) + 1e-11 * std::abs(c) +
                                   pc.noise * std::abs(sb) / std::abs(pc.omega);
                }
            }
            if (closable && closure_err < 1e-12 * scale + 1e-16) {
                total += closure;
                if (err_out) *err_out += err + closure_err + 0.05 * std::abs(closure);
                return total;
            }
            if (std::abs(contrib) < 1e-13 * scale + 1e-17) {
                if (++quiet >= 3) {
                    if (err_out) *err_out += err + std::abs(contrib);
                    return total;
                }
            } else {
                quiet = 0;
            }
            a = b;
        }
        std::ostringstream msg;
        msg << "pricing tail integral did not converge; achieved estimate " << total
            << " at l = " << a;
        throw std::runtime_error(msg.str());
    }

  private:
    Complex panel_integral(const TailPiece& pc, double a, double b, int depth, double* err) const {
        const auto pts = panel_.points(a, b);
        std::vector<Complex> vals(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = pc.slow(pts[i]);
        double tail = 0.0;
        const Complex v = panel_.integrate(vals, a, b, pc.omega, &tail);
        if (tail > std::max(1e-9, 3.0 * pc.noise) && depth < 8) {
            const double mid = 0.5 * (a + b);
            return panel_integral(pc, a, mid, depth + 1, err) + panel_integral(pc, mid, b, depth + 1, err);
        }
        *err += tail * std::abs(v);
        return v;
    }

    double h_max_;
    quad::OscPanel panel_;
};

double near_panel(const std::function<double(double)>& f, double* err) {
    const auto r = quad::adaptive(f, 0.0, 1.0, 1e-13, 1e-11);
    *err += r.error;
    return r.value;
}

// m-th derivative of the CF by central differences with one Richardson step.
// The step shrinks like 1/(1+l) at moderate l but widens with the order so
// that the 1/ε^m roundoff amplification stays below the ε² bias.
Complex cf_derivative(const CharFn& cf, double l, int m) {
    if (m == 0) return cf.eval(l);
    const double eps = std::max(1e-4 / (1.0 + std::abs(l)), m >= 2 ? 0.012 * m : 2e-6);
    const auto stencil = [&](double e) {
        Complex s = 0.0;
        for (int n = 0; n <= m; ++n) {
            const double c = real_binom(m, n) * ((n % 2) ? -1.0 : 1.0);
            s += c * cf.eval(l + (0.5 * m - n) * e);
        }
        return s / std::pow(e, m);
    };
    const Complex d1 = stencil(eps), d2 = stencil(0.5 * eps);
    return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

// ---------------------------------------------------------------------------

ContractSpec ContractSpec::power_swap(double p, double T, double delta) {
    ContractSpec c;
    c.kind = ContractKind::PowerSwap;
    c.p = p;
    c.maturity_T = T;
    c.delta = delta;
    c.validate();
    return c;
}

ContractSpec ContractSpec::asym_option(OptionSide side, double p1, double p2, double K, double T,
                                       double delta) {
    ContractSpec c;
    c.kind = ContractKind::AsymOption;
    c.side = side;
    c.p1 = p1;
    c.p2 = p2;
    c.strike = K;
    c.maturity_T = T;
    c.delta = delta;
    c.validate();
    return c;
}

ContractSpec ContractSpec::sym_option(OptionSide side, double p, double K, double T, double delta) {
    ContractSpec c;
    c.kind = ContractKind::SymOption;
    c.side = side;
    c.p = p;
    c.strike = K;
    c.maturity_T = T;
    c.delta = delta;
    c.validate();
    return c;
}

void ContractSpec::validate() const {
    if (!(maturity_T > 0.0)) throw std::invalid_argument("ContractSpec: maturity must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("ContractSpec: delta must be positive");
    switch (kind) {
        case ContractKind::PowerSwap:
            if (p < 0.0) throw std::invalid_argument("ContractSpec: swap power must be nonnegative");
            break;
        case ContractKind::AsymOption:
            if (!(strike > 0.0)) throw std::invalid_argument("ContractSpec: strike must be positive");
            if (!(p1 > 0.0) || p2 < 0.0)
                throw std::invalid_argument("ContractSpec: asymmetric powers need p1 > 0, p2 >= 0");
            break;
        case ContractKind::SymOption:
            if (!(strike > 0.0)) throw std::invalid_argument("ContractSpec: strike must be positive");
            if (p < 0.0) throw std::invalid_argument("ContractSpec: symmetric power must be nonnegative");
            break;
    }
}

Complex CachedCF::eval(double l) const {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = memo_.find(l);
        if (it != memo_.end()) return it->second;
    }
    const Complex v = base_->eval(l);
    std::lock_guard<std::mutex> lock(mutex_);
    memo_.emplace(l, v);
    return v;
}

double payoff(const ContractSpec& c, double i_T) {
    if (i_T < 0.0) throw std::invalid_argument("payoff: i_T must be nonnegative");
    switch (c.kind) {
        case ContractKind::PowerSwap:
            return std::pow(i_T, c.p);
        case ContractKind::AsymOption: {
            const double diff = std::pow(i_T, c.p1) - std::pow(c.strike, c.p2);
            return c.side == OptionSide::Call ? std::max(diff, 0.0) : std::max(-diff, 0.0);
        }
        case ContractKind::SymOption: {
            const double diff = c.side == OptionSide::Call ? i_T - c.strike : c.strike - i_T;
            return std::pow(std::max(diff, 0.0), c.p);
        }
    }
    throw std::logic_error("payoff: unreachable");
}

// ---------------------------------------------------------------------------
// Power swaps (fractional moments of the CF)
// ---------------------------------------------------------------------------

namespace {

double swap_even(int half_p, const CharFn& cf) {
    if (half_p == 0) return 1.0;
    const Complex d = cf_derivative(cf, 0.0, half_p);
    const Complex mom = std::pow(-kI, half_p) * d;
    return mom.real();
}

double swap_fractional(double p, const CharFn& cf, bool hedge) {
    const int m = static_cast<int>(std::floor(0.5 * p));
    const double q = 0.5 * p - m;
    const double front = 1.0 / std::cos(0.5 * M_PI * q) * q / std::tgamma(1.0 - q);
    const double omega = cf.carrier();

    const double s2m = swap_even(m, cf);
    const double hedge2m = (m == 0) ? 0.0 : 0.5 * (2.0 * m) * swap_even(m - 1, cf);

    const auto numerator = [&](double l) -> Complex {
        if (!hedge) return s2m - std::pow(-kI, m) * cf_derivative(cf, l, m);
        const Complex dm = cf_derivative(cf, l, m);
        const Complex dm1 = (m == 0) ? 0.0 : cf_derivative(cf, l, m - 1);
        return hedge2m - std::pow(-kI, m - 1) * (l * dm + static_cast<double>(m) * dm1);
    };

    double err = 0.0;
    const double near = near_panel(
        [&](double l) {
            if (l <= 0.0) return 0.0;
            return numerator(l).real() / std::pow(l, q + 1.0);
        },
        &err);

    // analytic part of the tail plus the oscillatory CF part
    const double const_part = (hedge ? hedge2m : s2m) / q;
    std::vector<TailPiece> pieces;
    if (!hedge) {
        pieces.push_back({[&, omega](double l) {
                              return -std::pow(-kI, m) * cf_derivative(cf, l, m) *
                                     std::exp(-kI * (omega * l)) / std::pow(l, q + 1.0);
                          },
                          omega, m >= 2 ? 1e-6 : (m == 1 ? 1e-7 : 0.0)});
    } else {
        pieces.push_back({[&, omega](double l) {
                              const Complex dm = cf_derivative(cf, l, m);
                              const Complex dm1 = (m == 0) ? 0.0 : cf_derivative(cf, l, m - 1);
                              return -std::pow(-kI, m - 1) * (l * dm + static_cast<double>(m) * dm1) *
                                     std::exp(-kI * (omega * l)) / std::pow(l, q + 1.0);
                          },
                          omega, m >= 2 ? 1e-6 : (m == 1 ? 1e-7 : 0.0)});
    }
    TailIntegrator ti;
    const Complex tail = ti.integrate(pieces, &err);
    return front * (near + const_part + tail.real());
}

}  // namespace

double swap_price(double p, const CharFn& cf) {
    if (p < 0.0) throw std::invalid_argument("swap_price: power must be nonnegative");
    if (p == 0.0) return 1.0;
    const double half = 0.5 * p;
    if (std::abs(half - std::round(half)) < 1e-14) return swap_even(static_cast<int>(std::round(half)), cf);
    return swap_fractional(p, cf, false);
}

double swap_hedge(double p, const CharFn& cf) {
    if (p < 0.0) throw std::invalid_argument("swap_hedge: power must be nonnegative");
    if (p == 0.0) return 0.0;
    const double half = 0.5 * p;
    if (std::abs(half - std::round(half)) < 1e-14) {
        const int hp = static_cast<int>(std::round(half));
        return 0.5 * p * (hp == 1 ? 1.0 : swap_even(hp - 1, cf));
    }
    return swap_fractional(p, cf, true);
}

// ---------------------------------------------------------------------------
// Option building block: G(s, κ̃; hedge) = ∫_0^∞ Re[γ(s, iκ̃l) φ(l) / (il)^{s+x}] dl
// with x = 1 for prices, 0 for hedges. The incomplete-gamma factor splits
// into a non-oscillatory Γ(s) part and a D(l) e^{-iκ̃l} part with shifted
// carrier, where D(l) = Γ(s, iκ̃l) e^{iκ̃l} varies slowly.
// ---------------------------------------------------------------------------

namespace {

struct OptionIntegrals {
    const CharFn& cf;
    double err = 0.0;

    Complex phi_slow(double l) const { return cf.eval(l) * std::exp(-kI * (cf.carrier() * l)); }

    // ∫_a^b f with plain oscillation-resolving panels; carriers stay below
    // ~1 rad per unit so a fixed panel width suffices
    double plain_region(const std::function<double(double)>& f, double a, double b) {
        const double h = 2.0;
        double acc = 0.0, x = a;
        while (x < b) {
            const double y = std::min(x + h, b);
            acc += quad::gauss(f, x, y, 16);
            x = y;
        }
        return acc;
    }

    // ∫_0^∞ Re[γ(s, iκ̃l) φ(l) / (il)^{s-off}] dl, off = 0 for prices and 1
    // for hedges (the hedge integrand is the price one times il). Splitting
    // γ = Γ(s) - Γ(s,·) below l* = (s+1)/κ̃ cancels catastrophically for
    // large s, so that zone integrates the regular form κ̃^s γ*(s, iκ̃l)
    // directly; the two-carrier Filon split starts beyond l*.
    double lower_gamma_block(double s, double ktilde, int off) {
        const double omega = cf.carrier();
        const double lstar = std::max(1.0, (s + 1.0) / ktilde);
        const auto regular = [&](double l) {
            if (l <= 0.0) return 0.0;
            const Complex z = kI * (ktilde * l);
            const Complex val = std::pow(ktilde, s) * gamma_star_series(s, z) * il_pow(l, off) * cf.eval(l);
            return val.real();
        };
        double head = near_panel(regular, &err);
        if (lstar > 1.0) head += plain_region(regular, 1.0, lstar);

        std::vector<TailPiece> pieces;
        pieces.push_back({[this, s, off](double l) {
                              return std::tgamma(s) * il_pow(l, off - s) * phi_slow(l);
                          },
                          omega});
        pieces.push_back({[this, s, off, ktilde](double l) {
                              const Complex z = kI * (ktilde * l);
                              const Complex D = specfun::upper_incomplete_gamma(s, z) * std::exp(z);
                              return -D * il_pow(l, off - s) * phi_slow(l);
                          },
                          omega - ktilde});
        TailIntegrator ti;
        const Complex tail = ti.integrate(pieces, &err, lstar);
        return head + tail.real();
    }

    // ∫_0^∞ Re[Γ(s, iκ̃l) φ(l) / (il)^{s-off}] dl; s may be negative in the
    // symmetric-call tail series.
    double upper_gamma_block(double s, double ktilde, int off) {
        const double omega = cf.carrier();
        const double lstar = std::max(1.0, (std::abs(s) + 2.0) / ktilde);
        const auto direct = [&](double l) {
            if (l <= 0.0) return 0.0;
            const Complex z = kI * (ktilde * l);
            Complex gu;
            if (std::abs(z) < 0.7) {
                // small-z reduction keeps the (il)^{-s} growth explicit
                gu = std::tgamma(s) * il_pow(l, -s) - std::pow(ktilde, s) * gamma_star_series(s, z);
                return (gu * il_pow(l, off) * cf.eval(l)).real();
            }
            gu = specfun::upper_incomplete_gamma(s, z);
            return (gu * il_pow(l, off - s) * cf.eval(l)).real();
        };
        const double head = near_panel(direct, &err) + plain_region(direct, 1.0, lstar);

        std::vector<TailPiece> pieces;
        pieces.push_back({[this, s, off, ktilde](double l) {
                              const Complex z = kI * (ktilde * l);
                              const Complex D = specfun::upper_incomplete_gamma(s, z) * std::exp(z);
                              return D * il_pow(l, off - s) * phi_slow(l);
                          },
                          omega - ktilde});
        TailIntegrator ti;
        const Complex tail = ti.integrate(pieces, &err, lstar);
        return head + tail.real();
    }

    // ∫_0^∞ Re[(K^{p2} e^{-iκ̃l} + γ(p̃+1, iκ̃l)/(il)^{p̃}) φ(l)/(il)^{1-off}] dl.
    // The price integrand's K^{p2}/(il) component is purely imaginary at
    // l -> 0, so subtracting it stabilizes the near panel without changing
    // the real part.
    double asym_block(double p_tilde, double kp2, double ktilde, int off) {
        const double omega = cf.carrier();
        const double s = p_tilde + 1.0;
        const double near = near_panel(
            [&](double l) {
                if (l <= 0.0) return 0.0;
                const Complex z = kI * (ktilde * l);
                const Complex bracket =
                    kp2 * std::exp(-z) + std::pow(ktilde, s) * il_pow(l, 1.0) * gamma_star_series(s, z);
                Complex val = bracket * cf.eval(l) * il_pow(l, off - 1.0);
                if (off == 0) val -= kp2 * il_pow(l, -1.0);
                return val.real();
            },
            &err);
        std::vector<TailPiece> pieces;
        // K^{p2} e^{-iκ̃l} and the D-part share the shifted carrier
        pieces.push_back({[this, off, kp2, p_tilde, s, ktilde](double l) {
                              const Complex z = kI * (ktilde * l);
                              const Complex D = specfun::upper_incomplete_gamma(s, z) * std::exp(z);
                              return (kp2 - D * il_pow(l, -p_tilde)) * il_pow(l, off - 1.0) * phi_slow(l);
                          },
                          omega - ktilde});
        pieces.push_back({[this, off, s, p_tilde](double l) {
                              return std::tgamma(s) * il_pow(l, off - 1.0 - p_tilde) * phi_slow(l);
                          },
                          omega});
        TailIntegrator ti;
        const Complex tail = ti.integrate(pieces, &err);
        return near + tail.real();
    }
};

double clamp_price(double v, double err, const char* what) {
    // truncated alternating series legitimately overshoot below zero by up
    // to their own error estimate
    if (v < -(50.0 * err + 1e-7)) throw std::runtime_error(std::string(what) + ": significantly negative price");
    return std::max(v, 0.0);
}

}  // namespace

PriceResult asym_option_price(const ContractSpec& c, const CharFn& cf) {
    c.validate();
    if (c.kind != ContractKind::AsymOption)
        throw std::invalid_argument("asym_option_price: wrong contract kind");
    const double p_tilde = 0.5 * c.p1;
    const double kp2 = std::pow(c.strike, c.p2);
    const double ktilde = std::pow(c.strike, 2.0 * c.p2 / c.p1);

    OptionIntegrals oi{cf};
    const double put = 0.5 * kp2 - oi.asym_block(p_tilde, kp2, ktilde, 0) / M_PI;
    const double hedge_put = -oi.asym_block(p_tilde, kp2, ktilde, 1) / M_PI;

    PriceResult out;
    out.quadrature_error_estimate = oi.err;
    if (c.side == OptionSide::Put) {
        out.price = clamp_price(put, oi.err, "asym put");
        out.hedge = hedge_put;
    } else {
        const double swap = swap_price(c.p1, cf);
        out.price = clamp_price(put - kp2 + swap, oi.err, "asym call");
        out.hedge = hedge_put + swap_hedge(c.p1, cf);
    }
    return out;
}

PriceResult sym_option_price(const ContractSpec& c, const CharFn& cf, int series_terms) {
    c.validate();
    if (c.kind != ContractKind::SymOption)
        throw std::invalid_argument("sym_option_price: wrong contract kind");
    const double p = c.p, K = c.strike, K2 = K * K;
    if (series_terms < static_cast<int>(std::ceil(p)) + 1)
        throw std::invalid_argument("sym_option_price: series_terms must be at least ceil(p)+1");

    OptionIntegrals oi{cf};
    PriceResult out;

    if (c.side == OptionSide::Put) {
        double price = 0.0, hedge = 0.0;
        double prev_mag = 0.0;
        const int guard = static_cast<int>(std::ceil(p)) + 2;
        const double scale = std::pow(K, p);
        double err_acc = 0.0;
        for (int k = 0;; ++k) {
            const double coef = real_binom(p, k) * ((k % 2) ? -1.0 : 1.0) * std::pow(K, p - k);
            if (coef == 0.0) break;  // integer p terminates the binomial series
            oi.err = 0.0;
            const double s = 0.5 * k + 1.0;
            const double term_p = coef / M_PI * oi.lower_gamma_block(s, K2, 0);
            const double term_h = coef / M_PI * oi.lower_gamma_block(s, K2, 1);
            err_acc += std::abs(coef) / M_PI * oi.err;
            price += term_p;
            hedge += term_h;
            const double mag = std::abs(term_p);
            const double noise = std::abs(coef) / M_PI * oi.err + 1e-13 * scale;
            if (k > guard && mag > std::max(1.2 * prev_mag, 10.0 * noise))
                throw std::runtime_error("sym_option_price: series terms stopped decreasing");
            prev_mag = mag;
            if (k >= series_terms || mag <= std::max(noise, 1e-13 * scale)) {
                if (k >= series_terms && mag > noise)
                    err_acc += mag * (k + 1.0) / std::max(p, 0.1);  // algebraic tail
                break;
            }
        }
        oi.err = err_acc;
        out.price = clamp_price(price, oi.err, "sym put");
        out.hedge = hedge;
    } else {
        double price = 0.0, hedge = 0.0;
        const int floor_p = static_cast<int>(std::floor(p));
        const bool integer_p = std::abs(p - std::round(p)) < 1e-12;
        for (int k = 0; k <= floor_p; ++k) {
            const double coef = real_binom(p, k) * std::pow(-K, k);
            const double pk = p - k;
            const double swap = swap_price(pk, cf);
            const double swap_h = swap_hedge(pk, cf);
            const double block_p = oi.lower_gamma_block(0.5 * pk + 1.0, K2, 0) / M_PI;
            const double block_h = oi.lower_gamma_block(0.5 * pk + 1.0, K2, 1) / M_PI;
            price += coef * (swap - block_p);
            hedge += coef * (swap_h - block_h);
        }
        if (!integer_p) {
            double prev_mag = 0.0;
            const double scale = std::pow(K, p);
            double err_base = oi.err;
            for (int k = floor_p + 1;; ++k) {
                const double coef = real_binom(p, k) * std::pow(-K, k);
                oi.err = 0.0;
                const double s = 1.0 - 0.5 * (k - p);
                const double term_p = coef / M_PI * oi.upper_gamma_block(s, K2, 0);
                const double term_h = coef / M_PI * oi.upper_gamma_block(s, K2, 1);
                err_base += std::abs(coef) / M_PI * oi.err;
                price += term_p;
                hedge += term_h;
                const double mag = std::abs(term_p);
                const double noise = std::abs(coef) / M_PI * oi.err + 1e-13 * scale;
                if (k > floor_p + 2 && mag > std::max(1.2 * prev_mag, 10.0 * noise))
                    throw std::runtime_error("sym_option_price: tail series stopped decreasing");
                prev_mag = mag;
                if (k >= series_terms || mag <= std::max(noise, 1e-12 * scale)) {
                    if (k >= series_terms) err_base += mag * (k + 1.0) / (p + 1.0);
                    break;
                }
            }
            oi.err = err_base;
        }
        out.price = clamp_price(price, oi.err, "sym call");
        out.hedge = hedge;
    }
    out.quadrature_error_estimate = oi.err;
    return out;
}

}  // namespace afv::pricing
