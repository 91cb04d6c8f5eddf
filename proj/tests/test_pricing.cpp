#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "afv/charfn.hpp"
#include "afv/pricing.hpp"
#include "afv/quad.hpp"
#include "test_util.hpp"

using namespace afv;
using namespace afv::pricing;
using Complex = std::complex<double>;

namespace {

const Complex I(0.0, 1.0);
constexpr double kT = 90.0 / 365.0;

// point mass at mu
struct DiracCF : CharFn {
    double mu;
    explicit DiracCF(double m) : mu(m) {}
    Complex eval(double l) const override { return std::exp(I * (l * mu)); }
    double carrier() const override { return mu; }
};

// X ~ Gamma(shape k, scale θ): a strictly positive law with closed moments
struct GammaCF : CharFn {
    double k, theta, shift;
    GammaCF(double k_, double th_, double shift_ = 0.0) : k(k_), theta(th_), shift(shift_) {}
    Complex eval(double l) const override {
        return std::exp(I * (l * shift)) * std::pow(1.0 - I * (l * theta), -k);
    }
    double carrier() const override { return shift; }
};

double gamma_moment(const GammaCF& g, double q) {
    // E[(X+shift)^q] only valid at shift = 0
    return std::pow(g.theta, q) * std::tgamma(g.k + q) / std::tgamma(g.k);
}

// oracle: E[payoff(√X)] under the gamma density, kink split at K²
double gamma_payoff_oracle(const GammaCF& g, const ContractSpec& c) {
    const auto dens = [&](double x) {
        const double y = x - g.shift;
        if (y <= 0.0) return 0.0;
        return std::pow(y, g.k - 1.0) * std::exp(-y / g.theta) / (std::tgamma(g.k) * std::pow(g.theta, g.k));
    };
    const auto f = [&](double x) { return payoff(c, std::sqrt(x)) * dens(x); };
    const double split = c.kind == ContractKind::SymOption
                             ? c.strike * c.strike
                             : std::pow(c.strike, 2.0 * c.p2 / c.p1);
    const double hi = g.shift + g.theta * (g.k + 60.0 + 10.0 * std::sqrt(g.k));
    double out = 0.0;
    if (split > 0.0 && split < hi)
        out = quad::adaptive(f, 0.0, split, 1e-13, 1e-11).value +
              quad::adaptive(f, split, hi, 1e-13, 1e-11).value;
    else
        out = quad::adaptive(f, 0.0, hi, 1e-13, 1e-11).value;
    return out;
}

}  // namespace

TEST_CASE("payoffs") {
    auto sym_put = ContractSpec::sym_option(OptionSide::Put, 1.0, 0.3, kT);
    CHECK(payoff(sym_put, 0.2) == doctest::Approx(0.1).epsilon(1e-14));

    auto asym_put = ContractSpec::asym_option(OptionSide::Put, 1.4, 1.4, 0.3, kT);
    CHECK(payoff(asym_put, 0.0) == doctest::Approx(std::pow(0.3, 1.4)).epsilon(1e-14));

    auto asym_call = ContractSpec::asym_option(OptionSide::Call, 2.0, 1.0, 0.04, kT);
    CHECK(payoff(asym_call, 0.25) == doctest::Approx(0.0225).epsilon(1e-12));

    CHECK(payoff(ContractSpec::power_swap(0.0, kT), 0.37) == 1.0);
}

TEST_CASE("swap prices against closed-form moments") {
    CHECK(swap_price(0.0, DiracCF(0.07)) == 1.0);

    // fractional moments above p = 2 lean on finite-difference CF
    // derivatives whose noise floor caps the attainable accuracy
    DiracCF pm(0.0712);
    for (double p : {1.0, 1.2, 2.0, 3.0, 4.0, 5.3}) {
        const double tol = p > 2.0 ? 2e-4 : 2e-7;
        CHECK(swap_price(p, pm) == doctest::Approx(std::pow(pm.mu, 0.5 * p)).epsilon(tol));
    }

    GammaCF g(4.0, 0.02);
    for (double p : {1.0, 1.2, 2.0, 3.0, 4.0}) {
        const double tol = p > 2.0 && std::abs(p - 4.0) > 1e-12 ? 2e-4 : 2e-7;
        CHECK(swap_price(p, g) == doctest::Approx(gamma_moment(g, 0.5 * p)).epsilon(tol));
    }
}

TEST_CASE("swap hedges") {
    GammaCF g(4.0, 0.02);
    // p = 2 exact unity, p = 4 twice the variance swap
    CHECK(swap_hedge(2.0, g) == 1.0);
    CHECK(swap_hedge(4.0, g) == doctest::Approx(2.0 * swap_price(2.0, g)).epsilon(1e-14));
    // fractional p: (p/2) E[X^{p/2-1}]
    for (double p : {1.0, 1.2, 3.0}) {
        CHECK(swap_hedge(p, g) == doctest::Approx(0.5 * p * gamma_moment(g, 0.5 * p - 1.0)).epsilon(5e-6));
    }
}

TEST_CASE("swap hedge equals bump-and-reprice in the forward-variance shift") {
    GammaCF base(4.0, 0.02);
    const double h = 1e-5;
    for (double p : {1.0, 1.2}) {
        const double up = swap_price(p, GammaCF(4.0, 0.02, h));
        const double dn = swap_price(p, GammaCF(4.0, 0.02, -h));
        const double fd = (up - dn) / (2.0 * h);
        CHECK(swap_hedge(p, base) == doctest::Approx(fd).epsilon(1e-4));
    }
}

TEST_CASE("asymmetric options against the density oracle") {
    GammaCF g(4.0, 0.02);
    for (auto [p1, p2] : {std::pair{1.0, 1.0}, {2.0, 1.0}, {1.3, 0.8}}) {
        for (double K : {0.18, 0.25, 0.32}) {
            auto put = ContractSpec::asym_option(OptionSide::Put, p1, p2, K, kT);
            auto call = ContractSpec::asym_option(OptionSide::Call, p1, p2, K, kT);
            const auto rp = asym_option_price(put, g);
            const auto rc = asym_option_price(call, g);
            CHECK(rp.price == doctest::Approx(gamma_payoff_oracle(g, put)).epsilon(3e-7));
            CHECK(rc.price == doctest::Approx(gamma_payoff_oracle(g, call)).epsilon(3e-7));
            // parity holds by construction; assert anyway
            const double resid = rc.price - rp.price - swap_price(p1, g) + std::pow(K, p2);
            CHECK(std::abs(resid) <= 1e-10);
        }
    }
}

TEST_CASE("worthless put at a vanishing strike") {
    GammaCF g(4.0, 0.02);
    auto put = ContractSpec::asym_option(OptionSide::Put, 1.0, 1.0, 1e-8, kT);
    CHECK(asym_option_price(put, g).price < 1e-6);
}

TEST_CASE("variance-option reduction at p1 = 2, p2 = 1") {
    // P = K/2 - (1/π) ∫ Re[(e^{-iKl} - 1) φ / l²] dl
    GammaCF g(4.0, 0.02);
    const double K = 0.07;
    const auto reduced = [&](double l) {
        return ((std::exp(-I * (K * l)) - 1.0) * g.eval(l) / (l * l)).real();
    };
    double want = 0.5 * K;
    want -= quad::adaptive(reduced, 1e-9, 1.0, 1e-13, 1e-12).value / M_PI;
    // oscillatory tail of the reduced integrand, straightforward panels
    double a = 1.0, acc = 0.0;
    for (int k = 0; k < 4000 && a < 3e6; ++k) {
        const double b = a + 0.5;
        acc += quad::gauss(reduced, a, b, 12);
        a = b;
    }
    want -= acc / M_PI;
    auto put = ContractSpec::asym_option(OptionSide::Put, 2.0, 1.0, K, kT);
    CHECK(asym_option_price(put, g).price == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("symmetric p = 1 equals the standard asymmetric option") {
    GammaCF g(4.0, 0.02);
    for (double K : {0.2, 0.27}) {
        auto s = ContractSpec::sym_option(OptionSide::Put, 1.0, K, kT);
        auto a = ContractSpec::asym_option(OptionSide::Put, 1.0, 1.0, K, kT);
        CHECK(sym_option_price(s, g).price == doctest::Approx(asym_option_price(a, g).price).epsilon(1e-8));
        auto sc = ContractSpec::sym_option(OptionSide::Call, 1.0, K, kT);
        auto ac = ContractSpec::asym_option(OptionSide::Call, 1.0, 1.0, K, kT);
        CHECK(sym_option_price(sc, g).price == doctest::Approx(asym_option_price(ac, g).price).epsilon(1e-7));
    }
}

TEST_CASE("symmetric options against the density oracle") {
    // non-integer powers truncate an algebraically decaying series; the
    // residual tail is what the reported error estimate carries
    GammaCF g(4.0, 0.02);
    for (double p : {0.8, 1.1, 2.0}) {
        auto put = ContractSpec::sym_option(OptionSide::Put, p, 0.25, kT);
        const auto r = sym_option_price(put, g);
        const double want = gamma_payoff_oracle(g, put);
        const double tol = (p == 2.0) ? 1e-8 : 1e-4;
        CHECK(std::abs(r.price - want) < tol);
    }
    for (double p : {1.1, 2.0}) {
        auto call = ContractSpec::sym_option(OptionSide::Call, p, 0.25, kT);
        const auto r = sym_option_price(call, g);
        const double want = gamma_payoff_oracle(g, call);
        const double tol = (p == 2.0) ? 1e-8 : 5e-5;
        CHECK(std::abs(r.price - want) < tol);
    }
}

TEST_CASE("hard series truncation reproduces the exact partial sums") {
    // the truncated price at N terms is the x-space partial sum
    // Σ_{k<=N} binom(p,k)(-1)^k K^{p-k} E[X^{k/2} 1{X<K²}]
    GammaCF g(4.0, 0.02);
    const double K = 0.25;
    const auto dens = [&](double x) {
        return std::pow(x, g.k - 1.0) * std::exp(-x / g.theta) / (std::tgamma(g.k) * std::pow(g.theta, g.k));
    };
    for (double p : {0.8, 1.1}) {
        auto put = ContractSpec::sym_option(OptionSide::Put, p, K, kT);
        for (int N : {4, 12}) {
            double partial = 0.0;
            for (int k = 0; k <= N; ++k) {
                double b = 1.0;
                for (int j = 1; j <= k; ++j) b *= (p - j + 1.0) / j;
                const double m = quad::adaptive([&](double x) { return std::pow(x, 0.5 * k) * dens(x); },
                                                0.0, K * K, 1e-13, 1e-11).value;
                partial += b * ((k % 2) ? -1.0 : 1.0) * std::pow(K, p - k) * m;
            }
            CHECK(sym_option_price(put, g, N).price == doctest::Approx(partial).epsilon(5e-6));
        }
    }
}

TEST_CASE("option hedges equal bump-and-reprice") {
    const double h = 1e-5;
    for (auto side : {OptionSide::Put, OptionSide::Call}) {
        auto asym = ContractSpec::asym_option(side, 1.0, 1.0, 0.25, kT);
        const auto r = asym_option_price(asym, GammaCF(4.0, 0.02));
        const double fd = (asym_option_price(asym, GammaCF(4.0, 0.02, h)).price -
                           asym_option_price(asym, GammaCF(4.0, 0.02, -h)).price) /
                          (2.0 * h);
        CHECK(r.hedge == doctest::Approx(fd).epsilon(1e-4));

        auto sym = ContractSpec::sym_option(side, 1.1, 0.25, kT);
        const auto rs = sym_option_price(sym, GammaCF(4.0, 0.02));
        const double fds = (sym_option_price(sym, GammaCF(4.0, 0.02, h)).price -
                            sym_option_price(sym, GammaCF(4.0, 0.02, -h)).price) /
                           (2.0 * h);
        CHECK(rs.hedge == doctest::Approx(fds).epsilon(1e-4));
    }
}

TEST_CASE("monotonicity in the strike") {
    GammaCF g(4.0, 0.02);
    double prev_put = -1.0, prev_call = 2.0;
    for (int i = 0; i < 20; ++i) {
        const double K = 0.12 + i * 0.01;
        const double put = asym_option_price(ContractSpec::asym_option(OptionSide::Put, 1.0, 1.0, K, kT), g).price;
        const double call = asym_option_price(ContractSpec::asym_option(OptionSide::Call, 1.0, 1.0, K, kT), g).price;
        CHECK(put >= prev_put - 1e-12);
        CHECK(call <= prev_call + 1e-12);
        prev_put = put;
        prev_call = call;
    }
}

TEST_CASE("payoff geometry of the two put families") {
    // pointwise agreement at the interval ends, ordering flip across p = 1
    for (double p : {0.7, 1.0, 1.4}) {
        const double K = 0.3;
        auto asym = ContractSpec::asym_option(OptionSide::Put, p, p, K, kT);
        auto sym = ContractSpec::sym_option(OptionSide::Put, p, K, kT);
        CHECK(payoff(asym, 0.0) == doctest::Approx(payoff(sym, 0.0)).epsilon(1e-13));
        CHECK(payoff(asym, K) == doctest::Approx(payoff(sym, K)).epsilon(1e-13));
        // for p < 1 the symmetric payoff (K-x)^p is concave on [0, K], hence
        // above the chord, while K^p - x^p is convex; the ordering flips at p = 1
        for (double x : {0.05, 0.15, 0.25}) {
            const double a = payoff(asym, x), s = payoff(sym, x);
            if (p < 1.0) CHECK(s >= a - 1e-13);
            if (p > 1.0) CHECK(a >= s - 1e-13);
            if (p == 1.0) CHECK(a == doctest::Approx(s).epsilon(1e-13));
        }
    }
}

TEST_CASE("swap price increases with the spot variance level") {
    const charfn::ModelParams params{levy::TemperedStableParams(0.1378, 1.63, 0.4351),
                                     levy::StableParams(1.78), kernels::KernelSpec::type3(5.4844, 0.7279),
                                     0.0, 0.25, 6.0 / 73.0, 0.01};
    double prev = -1.0;
    for (double i0 : {0.2, 0.24, 0.2667, 0.3, 0.34}) {
        charfn::ModelState st;
        st.i0_sq = i0 * i0;
        st.remainder = 0.0133;
        charfn::AvgForwardVarianceCF cf(params, st, 0.0, kT);
        const double s1 = swap_price(1.0, cf);
        CHECK(s1 > prev);
        prev = s1;
    }
}

TEST_CASE("cached CF is transparent") {
    GammaCF g(4.0, 0.02);
    CachedCF cached(g);
    auto c = ContractSpec::asym_option(OptionSide::Put, 1.0, 1.0, 0.25, kT);
    CHECK(asym_option_price(c, cached).price == doctest::Approx(asym_option_price(c, g).price).epsilon(1e-14));
    CHECK(swap_price(1.0, cached) == doctest::Approx(swap_price(1.0, g)).epsilon(1e-14));
}

TEST_CASE("contract validation") {
    CHECK_THROWS_AS(ContractSpec::asym_option(OptionSide::Put, 0.0, 1.0, 0.2, kT), std::invalid_argument);
    CHECK_THROWS_AS(ContractSpec::asym_option(OptionSide::Put, 1.0, 1.0, -0.2, kT), std::invalid_argument);
    CHECK_THROWS_AS(ContractSpec::power_swap(-1.0, kT), std::invalid_argument);
    CHECK_THROWS_AS(ContractSpec::sym_option(OptionSide::Put, 1.0, 0.2, -1.0), std::invalid_argument);
    GammaCF g(4.0, 0.02);
    auto c = ContractSpec::sym_option(OptionSide::Put, 1.4, 0.25, kT);
    CHECK_THROWS_AS(sym_option_price(c, g, 1), std::invalid_argument);
}
