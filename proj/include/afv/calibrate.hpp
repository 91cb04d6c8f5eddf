#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "afv/charfn.hpp"
#include "afv/kernels.hpp"
#include "afv/pricing.hpp"

namespace afv::calibrate {

struct QuoteRecord {
    std::string quote_date;  // YYYY-MM-DD
    int maturity_days = 0;
    double strike = 0.0;     // volatility units (0.25 = 25 points)
    pricing::OptionSide side = pricing::OptionSide::Put;
    double mid_price = 0.0;  // same units
};

struct QuoteSet {
    std::vector<QuoteRecord> records;
    std::vector<int> maturities;  // distinct, ascending (days)

    std::vector<const QuoteRecord*> by_maturity(int days) const;
};

// CSV with header quote_date,maturity_days,strike,side,mid_price.
QuoteSet load_quotes(const std::string& path);
void save_quotes(const QuoteSet& quotes, const std::string& path);
QuoteSet make_quote_set(std::vector<QuoteRecord> records);

struct CalibBox {
    double a_lo = 0.01, a_hi = 2.0;
    double b_lo = 0.05, b_hi = 5.0;
    double c_lo = 0.05, c_hi = 0.95;
    double d_lo = 0.55, d_hi = 0.95;
    double kappa_lo = 0.5, kappa_hi = 10.0;
};

struct CalibVector {
    double a = 0.1, b = 1.0, c = 0.5, d = 0.75, kappa = 5.0;
    std::vector<double> remainders;  // one per distinct maturity
};

// Quantities held fixed during calibration.
struct CalibFixed {
    double alpha = 1.78;
    double varsigma = 0.01;
    double delta = 6.0 / 73.0;
    double i0_sq = 0.0;  // squared spot index
    kernels::Family family = kernels::Family::TypeIII;
};

// Shared sinusoidal-factor splines; the factor does not depend on the
// calibration vector, so one spline per maturity serves every candidate.
class SplineCache {
  public:
    std::shared_ptr<const charfn::SplineCF> get(double T, const CalibFixed& fixed);

  private:
    std::map<long long, std::shared_ptr<const charfn::SplineCF>> cache_;
    std::mutex mutex_;
};

// Σ (market - model)² over all quotes; model prices are standard options
// (p1 = p2 = 1) under the candidate vector.
double objective(const CalibVector& v, const QuoteSet& quotes, const CalibFixed& fixed,
                 SplineCache* splines = nullptr, std::vector<double>* residuals = nullptr);

struct CalibConfig {
    CalibFixed fixed;
    CalibBox box;
    int population = 60;
    int generations = 80;
    long budget = 5000;      // total objective evaluations across both stages
    double mesh_tol = 1e-6;  // relative to box width
    double crossover = 0.8;
    std::uint64_t seed = 1;
};

struct CalibResult {
    CalibVector vector;
    double rmse = 0.0;
    long objective_evals = 0;
    std::vector<double> stage1_trace;  // best objective per generation
    std::vector<double> stage2_trace;  // best objective per poll round
    std::vector<double> residuals;     // market - model per quote, final vector
    std::vector<std::string> warnings;
};

// Two-stage search: genetic algorithm to locate a basin, generalized pattern
// search to refine. Fixed seed gives identical results run to run.
CalibResult calibrate(const QuoteSet& quotes, const CalibConfig& config);

// Remainder bound per maturity: |r| <= T²/Δ + 3ς.
double remainder_bound(double T, const CalibFixed& fixed);

}  // namespace afv::calibrate
