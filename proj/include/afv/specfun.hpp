#pragma once

#include <complex>

namespace afv::specfun {

using Complex = std::complex<double>;

// Lambert W on the real branches. branch 0 needs x >= -1/e, branch -1 needs
// -1/e <= x < 0. Solved to |W e^W - x| <= 1e-13 max(1,|x|).
double lambert_w(int branch, double x);

// Principal-branch upper incomplete gamma Γ(s, z) for real s and complex z,
// |arg z| <= π. s <= 0 is reached through the downward recurrence
// Γ(s, z) = (Γ(s+1, z) - z^s e^{-z}) / s and needs z != 0.
Complex upper_incomplete_gamma(double s, Complex z);

// γ(s, z) = Γ(s) - Γ(s, z), same conventions. Needs s > 0 or the series form.
Complex lower_incomplete_gamma(double s, Complex z);

// Gauss hypergeometric 2F1(a, b; c; z) for real parameters and complex z,
// principal branch. Analytic continuation beyond |z| < 1 uses the Pfaff,
// 1-z and 1/z linear transformations; degenerate integer cases that none of
// the implemented paths can reach raise std::domain_error.
Complex gauss_2f1(double a, double b, double c, Complex z);

// Symmetric alpha-stable density with characteristic function e^{-t|l|^α}:
// f(x) = (1/π) ∫_0^∞ cos(lx) e^{-t l^α} dl.
double stable_density(double x, double t, double alpha);

// Upper tail mass P(Z > x) of the same law; asymptotic series for large x,
// quadrature of 1/2 - ∫ f otherwise.
double stable_tail_mass(double x, double t, double alpha);

}  // namespace afv::specfun
