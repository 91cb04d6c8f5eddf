#pragma once

#include <complex>
#include <mutex>
#include <unordered_map>

#include "afv/charfn.hpp"

namespace afv::pricing {

using charfn::CharFn;
using Complex = std::complex<double>;

enum class ContractKind { PowerSwap, AsymOption, SymOption };
enum class OptionSide { Call, Put };

struct ContractSpec {
    ContractKind kind;
    OptionSide side = OptionSide::Put;
    double maturity_T = 0.0;
    double delta = 6.0 / 73.0;
    double strike = 0.0;  // volatility units, options only
    double p = 0.0;       // swap / symmetric power
    double p1 = 0.0, p2 = 0.0;  // asymmetric powers

    static ContractSpec power_swap(double p, double T, double delta = 6.0 / 73.0);
    static ContractSpec asym_option(OptionSide side, double p1, double p2, double K, double T,
                                    double delta = 6.0 / 73.0);
    static ContractSpec sym_option(OptionSide side, double p, double K, double T, double delta = 6.0 / 73.0);

    void validate() const;
};

struct PriceResult {
    double price = 0.0;
    double hedge = 0.0;  // sensitivity to the kernel-modulated forward variance
    double quadrature_error_estimate = 0.0;
};

// Memoizing view over a characteristic function; pricing panel layouts are
// deterministic, so strikes sharing a maturity reuse evaluations.
class CachedCF : public CharFn {
  public:
    explicit CachedCF(const CharFn& base) : base_(&base) {}
    Complex eval(double l) const override;
    double carrier() const override { return base_->carrier(); }

  private:
    const CharFn* base_;
    mutable std::unordered_map<double, Complex> memo_;
    mutable std::mutex mutex_;
};

// E[I^p_T] through the fractional-moment representation of the CF.
double swap_price(double p, const CharFn& cf);

// ∂/∂J of the swap price.
double swap_hedge(double p, const CharFn& cf);

// Asymmetric power option (K^{p2} - I^{p1})^+ / (I^{p1} - K^{p2})^+; the call
// comes from put-call parity, so the parity residual vanishes by
// construction.
PriceResult asym_option_price(const ContractSpec& c, const CharFn& cf);

// Symmetric power option ((K - I)^+)^p / ((I - K)^+)^p via the binomial
// series; series_terms bounds the truncation index.
PriceResult sym_option_price(const ContractSpec& c, const CharFn& cf, int series_terms = 40);

// Pointwise payoff at terminal average forward volatility i_T.
double payoff(const ContractSpec& c, double i_T);

}  // namespace afv::pricing
