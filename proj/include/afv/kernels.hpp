#pragma once

#include <utility>

namespace afv::kernels {

enum class Family { TypeI, TypeII, TypeIII };

// Stationary kernel h(u) of the fractional variance process together with
// its closed-form running averages. Construct through the factories; they
// enforce the per-family parameter ranges.
//
//   TypeI   h(u) = e^{-κu} u^{d-1} / Γ(d),                        d > 1/2
//   TypeII  h(u) = [u^{d-1} + (-κ)^{1-d} e^{-κu} γ(d,-κu)] / Γ(d), d in (1/2,1]
//   TypeIII power piece glued continuously-differentiably to θ e^{-κu} at τ,
//           d in (1/2,1)
struct KernelSpec {
    Family family;
    double kappa;
    double d;
    double tau = 0.0;    // type III only
    double theta = 0.0;  // type III only

    static KernelSpec type1(double kappa, double d);
    static KernelSpec type2(double kappa, double d);
    // specialized type III: τ = (1-d)/κ, θ = -(eκ)^{1-d}/((1-d)^{2-d} Γ(d-1))
    static KernelSpec type3(double kappa, double d);
    // general type III with θ given; τ from the gluing equation, W branch 0 or -1
    static KernelSpec type3_general(double kappa, double d, double theta, int branch);
};

// τ solving e^{κτ} τ^{d-2} = -κ θ Γ(d-1); requires the solvability bound
// θ >= -(1/(κΓ(d-1))) ((2-d)/(eκ))^{d-2}.
double solve_tau(double kappa, double d, double theta, int branch);

// h(u), u > 0.
double kernel_eval(const KernelSpec& k, double u);

// ∫_0^x h(u) du, closed form per family.
double kernel_integral0(const KernelSpec& k, double x);

// Δ-forward integrated kernel H_Δ(u) = (1/Δ) ∫_0^Δ h(u+v) dv, u >= 0.
double integrated_kernel(const KernelSpec& k, double delta, double u);

// Υ_Δ = (1/Δ) ∫_0^Δ ∫_0^u h(v) dv du, time-constant for all three families.
double upsilon(const KernelSpec& k, double delta);

// Short-term covariance constant C = Γ(1-2d) sin(πd) / (π Γ²(d)), d in (1/2,1).
// For type II the constant is only located inside a band, see
// short_term_band.
double short_term_constant(const KernelSpec& k);

// Type-II band C × (e^{-2κt}, 1).
std::pair<double, double> short_term_band(const KernelSpec& k, double t);

}  // namespace afv::kernels
