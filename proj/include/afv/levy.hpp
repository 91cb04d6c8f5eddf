#pragma once

#include <complex>
#include <utility>

#include "afv/rng.hpp"

namespace afv::levy {

using Complex = std::complex<double>;

// Tempered stable subordinator: Lévy density a e^{-bz} z^{-c-1} on (0, ∞).
// c = 1/2 is the inverse Gaussian process; c = 0 is admitted as the gamma
// process limit with log φ(l) = -a log(1 - il/b).
struct TemperedStableParams {
    double a;  // intensity scale, > 0
    double b;  // tempering rate, > 0
    double c;  // stability index, in [0, 1)

    TemperedStableParams(double a_, double b_, double c_);
};

struct StableParams {
    double alpha;  // stability index in (0, 2]

    explicit StableParams(double alpha_ = 1.78);
};

// log E[e^{ilX_1}] = a Γ(-c)((b - il)^c - b^c), principal branch.
// Complex l admitted with Im(l) > -b.
Complex ts_char_exponent(const TemperedStableParams& p, Complex l);

// (ξ1, ξ2) = (E[X_1], Var[X_1]) = (a Γ(1-c)/b^{1-c}, a Γ(2-c)/b^{2-c}).
std::pair<double, double> ts_moments(const TemperedStableParams& p);

// φ_{Z_t}(l) = e^{-t|l|^α}.
double stable_char(const StableParams& p, double l, double t);

// Draw of the increment X_{t+dt} - X_t. Exact inverse Gaussian sampler at
// c = 1/2, gamma at c = 0, exponential-tilting rejection from a one-sided
// stable draw otherwise.
double sample_ts_increment(const TemperedStableParams& p, double dt, RandomStream& rng);

// Symmetric alpha-stable increment with scale dt^{1/α}, Chambers-Mallows-Stuck.
double sample_stable_increment(const StableParams& p, double dt, RandomStream& rng);

// One-sided stable draw with Laplace transform e^{-λ^c} (Kanter's method);
// exposed for the sampler tests.
double sample_onesided_stable(double c, RandomStream& rng);

}  // namespace afv::levy
