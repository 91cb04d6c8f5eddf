#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "afv/charfn.hpp"
#include "afv/quad.hpp"
#include "afv/specfun.hpp"
#include "test_util.hpp"

using namespace afv;
using namespace afv::charfn;
using Complex = std::complex<double>;

namespace {

const Complex I(0.0, 1.0);

ModelParams table_2016_type3() {
    return ModelParams{levy::TemperedStableParams(0.1378, 1.63, 0.4351), levy::StableParams(1.78),
                       kernels::KernelSpec::type3(5.4844, 0.7279), 0.0, 0.25, 6.0 / 73.0};
}

ModelState table_2016_state() {
    ModelState st;
    st.i0_sq = 0.2667 * 0.2667;
    st.varsigma = 0.01;
    st.remainder = 0.0133;
    return st;
}

// brute-force sinusoidal factor: M(l) = 1 + ∫ (ψ(l,x)-1) f_{Z_t}(x) dx
Complex m_factor_bruteforce(double l, const ModelParams& params, const ModelState& state, double t) {
    const double X = 1500.0;
    const auto fre = [&](double x) {
        return ((psi(l, x, state, params) - 1.0) * specfun::stable_density(x, t, params.stable.alpha)).real();
    };
    const auto fim = [&](double x) {
        return ((psi(l, x, state, params) - 1.0) * specfun::stable_density(x, t, params.stable.alpha)).imag();
    };
    const double re = quad::adaptive(fre, -X, X, 1e-11, 1e-10).value;
    const double im = quad::adaptive(fim, -X, X, 1e-11, 1e-10).value;
    return 1.0 + Complex(re, im);
}

}  // namespace

TEST_CASE("psi basics") {
    const auto params = table_2016_type3();
    auto state = table_2016_state();

    CHECK(std::abs(psi(0.0, 1.3, state, params) - 1.0) < 1e-15);

    auto s0 = state;
    s0.varsigma = 0.0;
    CHECK(std::abs(psi(7.0, -0.4, s0, params) - 1.0) < 1e-15);

    // hand-evaluated symmetric-stable form at l=1, x=0, t0=0
    const double delta = params.delta;
    const Complex want = std::exp(I * (0.01 / delta) * ((1.0 - std::exp(-delta)) + delta));
    CHECK(std::abs(psi(1.0, 0.0, state, params) - want) < 1e-14);

    // purely imaginary exponent for real l
    for (double l : {0.3, 2.0, 40.0}) {
        for (double x : {-2.0, 0.7}) CHECK(std::abs(std::abs(psi(l, x, state, params)) - 1.0) < 1e-14);
    }
}

TEST_CASE("characteristic function normalization, symmetry, contraction") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 4; ++trial) {
        const double a = 0.05 + 0.4 * u01(rng), b = 0.5 + 2.0 * u01(rng), c = 0.1 + 0.8 * u01(rng);
        const double d = 0.55 + 0.4 * u01(rng), kappa = 1.0 + 7.0 * u01(rng);
        ModelParams p{levy::TemperedStableParams(a, b, c), levy::StableParams(1.78),
                      (trial % 2 == 0) ? kernels::KernelSpec::type3(kappa, std::min(d, 0.95))
                                       : kernels::KernelSpec::type1(kappa, d),
                      0.0, 0.2, 6.0 / 73.0};
        ModelState st;
        st.i0_sq = 0.05 + 0.05 * u01(rng);
        st.varsigma = 0.01;
        st.remainder = 0.005;
        const double t = 0.1 + 0.6 * u01(rng);
        AvgForwardVarianceCF cf(p, st, 0.0, t);

        CHECK(std::abs(cf.eval(0.0) - 1.0) == 0.0);
        for (int i = 1; i <= 16; ++i) {
            const double l = std::pow(10.0, -1.0 + 3.0 * i / 16.0);
            const Complex v = cf.eval(l);
            CHECK(std::abs(v - std::conj(cf.eval(-l))) <= 1e-12);
            CHECK(std::abs(v) <= 1.0 + 1e-12);
        }
        // decay trend on a log grid
        for (double l : {4.0, 16.0, 64.0, 256.0}) {
            CHECK(std::abs(cf.eval(l)) <= std::abs(cf.eval(l / 4.0)) + 1e-6);
        }
    }
}

TEST_CASE("vanishing sinusoidal scale reduces the CF to the jump factor") {
    auto params = table_2016_type3();
    auto state = table_2016_state();
    state.varsigma = 0.0;
    const double T = 90.0 / 365.0;
    AvgForwardVarianceCF cf(params, state, 0.0, T);
    for (double l : {0.5, 3.0, 25.0}) {
        const Complex direct = std::exp(I * l * cf.kernel_forward_value() + cf.log_jump_factor(l));
        CHECK(std::abs(cf.eval(l) - direct) < 1e-14);
        CHECK(std::abs(cf.sinusoidal_factor(l) - 1.0) == 0.0);
    }
}

TEST_CASE("sinusoidal factor equals direct density quadrature") {
    const auto params = table_2016_type3();
    const auto state = table_2016_state();
    const double T = 90.0 / 365.0;
    AvgForwardVarianceCF cf(params, state, 0.0, T);
    for (double l : {0.5, 5.0, 50.0}) {
        const Complex got = cf.sinusoidal_factor(l);
        const Complex want = m_factor_bruteforce(l, params, state, T);
        CHECK(std::abs(got - want) < 3e-6);
    }
}

TEST_CASE("sinusoidal factor cross-checked against analytic wrap coefficients") {
    // Poisson summation: the wrapped density's cosine coefficients equal the
    // stable CF at the integers, so the Jacobi-Anger assembly can be rebuilt
    // from e^{-t m^α} directly.
    const auto params = table_2016_type3();
    const auto state = table_2016_state();
    const double T = 90.0 / 365.0, alpha = 1.78;
    AvgForwardVarianceCF cf(params, state, 0.0, T);
    const double rate = state.varsigma * (1.0 - std::exp(-params.delta)) / params.delta;
    for (double l : {1.0, 100.0, 10000.0}) {
        const double gamma = rate * l;
        const int K = 64;
        const auto J = quad::bessel_j_array(K, std::abs(gamma));
        Complex sum = J[0];
        Complex ipow = I;
        for (int m = 1; m <= K; ++m) {
            sum += 2.0 * ipow * J[m] * std::exp(-T * std::pow(m, alpha));
            ipow *= I;
        }
        const Complex analytic = std::exp(I * l * state.varsigma) * sum;
        CHECK(std::abs(cf.sinusoidal_factor(l) - analytic) < 1e-7);
    }
}

TEST_CASE("remainder bound enforced") {
    auto params = table_2016_type3();
    auto state = table_2016_state();
    const double T = 90.0 / 365.0;
    state.remainder = T * T / params.delta + 3.0 * state.varsigma + 1e-3;
    CHECK_THROWS_AS(AvgForwardVarianceCF(params, state, 0.0, T), std::domain_error);
}

TEST_CASE("smoothing spline: fidelity and degenerate flatness") {
    const auto params = table_2016_type3();
    const auto state = table_2016_state();
    const double T = 90.0 / 365.0;

    auto sp = build_spline_cf(params, state, 0.0, T, 3000, 1e4, 0.0295);
    CHECK(sp.fit_mse_re <= 1e-9);
    CHECK(sp.fit_mse_im <= 1e-9);

    AvgForwardVarianceCF cf(params, state, 0.0, T);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1e4, 1e4);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
        const double l = u(rng);
        worst = std::max(worst, std::abs(sp.eval(l) - cf.sinusoidal_factor(l)));
    }
    CHECK(worst <= 1e-4);

    CHECK_THROWS_AS(sp.eval(1.0001e4), std::domain_error);

    auto s0 = state;
    s0.varsigma = 0.0;
    auto flat = build_spline_cf(params, s0, 0.0, T, 200, 2000.0, 0.0295);
    for (std::size_t i = 0; i < flat.knots.size(); ++i) {
        CHECK(std::abs(flat.re_val[i] - 1.0) < 1e-12);
        CHECK(std::abs(flat.im_val[i]) < 1e-12);
        CHECK(std::abs(flat.re_dd[i]) < 1e-8);
        CHECK(std::abs(flat.im_dd[i]) < 1e-8);
    }
}

TEST_CASE("spline-backed CF agrees with the direct CF") {
    const auto params = table_2016_type3();
    const auto state = table_2016_state();
    const double T = 90.0 / 365.0;
    auto sp = std::make_shared<SplineCF>(build_spline_cf(params, state, 0.0, T, 3000, 1e4, 0.0295));
    AvgForwardVarianceCF with(params, state, 0.0, T, sp);
    AvgForwardVarianceCF without(params, state, 0.0, T);
    for (double l : {0.3, 7.0, 120.0, 2500.0, 9000.0, 12000.0}) {
        CHECK(std::abs(with.eval(l) - without.eval(l)) < 1e-4);
    }
}

// ---------------------------------------------------------------------------
// closed-form partial forward variance (type III)
// ---------------------------------------------------------------------------

namespace {

// quadrature of the defining exponent: il(V - ξ1 ∫_Δ^{tt+Δ} h) + ∫_Δ^{tt+Δ} log φ_{X1}(l h(u)) du
Complex partial_cf_oracle(double l, const ModelParams& params, const ModelState& state, double tt,
                          double delta) {
    const auto& k = params.kernel;
    const double xi1 = levy::ts_moments(params.ts).first;
    const auto exponent_at = [&](double u) {
        return levy::ts_char_exponent(params.ts, l * kernels::kernel_eval(k, u));
    };
    Complex jump = 0.0;
    double int_h = 0.0;
    const double lo = delta, hi = tt + delta;
    std::vector<std::pair<double, double>> segs;
    if (lo < k.tau && k.tau < hi) {
        segs.push_back({lo, k.tau});
        segs.push_back({k.tau, hi});
    } else {
        segs.push_back({lo, hi});
    }
    for (auto [a, b] : segs) {
        if (a <= 1e-14) {
            // u^{d-1} singularity at zero: substitute u = w^{1/d}
            const double d = k.d;
            const auto gre = [&](double w) {
                const double u = std::pow(w, 1.0 / d);
                return exponent_at(u).real() * std::pow(w, 1.0 / d - 1.0) / d;
            };
            const auto gim = [&](double w) {
                const double u = std::pow(w, 1.0 / d);
                return exponent_at(u).imag() * std::pow(w, 1.0 / d - 1.0) / d;
            };
            jump += Complex(quad::adaptive(gre, 1e-300, std::pow(b, d), 1e-13, 1e-11).value,
                            quad::adaptive(gim, 1e-300, std::pow(b, d), 1e-13, 1e-11).value);
            const auto hsub = [&](double w) {
                const double u = std::pow(w, 1.0 / d);
                return kernels::kernel_eval(k, u) * std::pow(w, 1.0 / d - 1.0) / d;
            };
            int_h += quad::adaptive(hsub, 1e-300, std::pow(b, d), 1e-13, 1e-11).value;
        } else {
            jump += Complex(quad::adaptive([&](double u) { return exponent_at(u).real(); }, a, b, 1e-13, 1e-11).value,
                            quad::adaptive([&](double u) { return exponent_at(u).imag(); }, a, b, 1e-13, 1e-11).value);
            int_h += quad::adaptive([&](double u) { return kernels::kernel_eval(k, u); }, a, b, 1e-13, 1e-11).value;
        }
    }
    return std::exp(I * l * (state.i0_sq - xi1 * int_h) + jump);
}

}  // namespace

TEST_CASE("closed-form partial forward variance CF matches its defining quadrature") {
    auto params = table_2016_type3();
    ModelState st;
    st.i0_sq = 0.06;
    const double T = 90.0 / 365.0, delta = 6.0 / 73.0;

    CHECK(cf_partial_forward_variance_closed(0.0, params, st, 0.0, T, delta) == Complex(1.0, 0.0));

    for (double l : {0.5, 1.0, 5.0, 20.0}) {
        const Complex got = cf_partial_forward_variance_closed(l, params, st, 0.0, T, delta);
        const Complex want = partial_cf_oracle(l, params, st, T, delta);
        CHECK(std::abs(got - want) <= 1e-6 * std::abs(want));
    }
}

TEST_CASE("closed-form partial CF: delta = 0 inside the power branch") {
    auto params = table_2016_type3();
    // tau = (1-d)/kappa ≈ 0.0496; pick t - t0 < tau so only the power piece
    // contributes
    const double tt = 0.03;
    CHECK(tt < params.kernel.tau);
    ModelState st;
    st.i0_sq = 0.05;
    for (double l : {0.5, 2.0, 10.0}) {
        const Complex got = cf_partial_forward_variance_closed(l, params, st, 0.0, tt, 0.0);
        const Complex want = partial_cf_oracle(l, params, st, tt, 0.0);
        CHECK(std::abs(got - want) <= 2e-6 * std::abs(want));
    }
    // general (τ, θ) parameterization, both branches crossed
    auto k2 = kernels::KernelSpec::type3_general(4.0, 0.72, 2.0, 0);
    ModelParams p2{params.ts, params.stable, k2, 0.0, 0.2, 6.0 / 73.0};
    for (double l : {0.7, 6.0}) {
        const Complex got = cf_partial_forward_variance_closed(l, p2, st, 0.0, 0.4, 0.05);
        const Complex want = partial_cf_oracle(l, p2, st, 0.4, 0.05);
        CHECK(std::abs(got - want) <= 2e-6 * std::abs(want));
    }
}

TEST_CASE("time-changed CF: normalization and the degenerate time change") {
    auto params = table_2016_type3();
    const double t = 0.25;

    // near-deterministic subordinator with mean rate κ_η and an exponential
    // kernel: Y^{(η)} ≈ 1, so the time change is close to the identity
    // (startup transient shifts E[T_t] by 1/κ_η, hence the large κ_η)
    const double kap_eta = 400.0, b_y = 2500.0, c_y = 0.5;
    const double a_y = kap_eta * std::pow(b_y, 1.0 - c_y) / std::tgamma(1.0 - c_y);
    levy::TemperedStableParams y(a_y, b_y, c_y);
    auto eta = kernels::KernelSpec::type1(kap_eta, 1.0 - 1e-9);

    CHECK(cf_timechanged(0.0, params, eta, y, t) == Complex(1.0, 0.0));

    // reference: plain CF at horizon t with the deterministic time-0 state
    ModelState st;
    st.varsigma = 0.0;
    AvgForwardVarianceCF probe(params, st, 0.0, t);
    const double kd = params.kernel.kappa * params.delta;
    const double D = params.v0 *
                     (std::exp(-params.kernel.kappa * t) - std::exp(-params.kernel.kappa * (t + params.delta))) /
                     kd;
    st.i0_sq = D + probe.xi1() * (kernels::upsilon(params.kernel, params.delta) + probe.integrated_H());
    st.varsigma = 0.01;
    AvgForwardVarianceCF ref(params, st, 0.0, t);
    for (double l : {1.0, 5.0}) {
        CHECK(std::abs(cf_timechanged(l, params, eta, y, t) - ref.eval(l)) < 1e-2);
    }
}
