#pragma once

#include <cstdint>
#include <vector>

#include "afv/charfn.hpp"

namespace afv::simulate {

using charfn::ModelParams;

struct SimGrid {
    double T;            // horizon, years
    int M;               // time steps
    std::uint64_t seed;
    int n_paths;

    void validate() const;
};

enum class Quantity { InstVar, AvgFwdVar };

struct PathSet {
    std::vector<double> times;           // M+1 grid points
    std::vector<std::vector<double>> values;  // per path
    Quantity quantity;
};

// Discretized instantaneous variance V̌ on the uniform grid: kernel-weighted
// sum of i.i.d. tempered-stable increments plus the sinusoidal term.
PathSet simulate_inst_var(const ModelParams& params, const SimGrid& grid);

// Discretized average forward variance Ǐ²(Δ) with the closed-form H_Δ
// weights and analytic sinusoidal averages.
PathSet simulate_avg_forward_variance(const ModelParams& params, const SimGrid& grid);

// V̌ at selected grid indices only (marginals of the same law as the full
// path simulation, per-path cost O(|indices| · M)).
std::vector<std::vector<double>> simulate_inst_var_at(const ModelParams& params, const SimGrid& grid,
                                                      const std::vector<int>& indices);

// Terminal draws of Ǐ²_T for Monte-Carlo pricing. Identical law to the last
// column of simulate_avg_forward_variance; the sinusoidal sum is drawn as a
// single stable increment of the aggregated time.
std::vector<double> simulate_terminal_avg_fwd_var(const ModelParams& params, const SimGrid& grid);

struct ConvergenceRow {
    int M;
    double bias;     // mean(V̌) - E[V_t]
    double mse;      // bias² + cross-path variance
    double excess;   // mse - Var[V_t]
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    double slope;        // log-log slope of |excess| against M
    double var_exact;    // ξ2 ∫ h² + ς² Var[cos Z_t]
};

// Discretization-rate diagnostic at time t: estimators for every M share the
// finest-grid increments (block sums keep the law exact), so the excess
// sequence is strongly positively coupled across M.
ConvergenceReport convergence_report(const ModelParams& params, double t, const std::vector<int>& m_list,
                                     int n_paths, std::uint64_t seed);

// Analytic conditional moments at time 0.
double mean_inst_var(const ModelParams& params, double t);
double var_inst_var(const ModelParams& params, double t);
double mean_avg_forward_variance(const ModelParams& params, double t);

// v0 making the simulated model consistent with a quoted spot state:
// J(t,0,Δ) from (i0_sq, remainder) equals the deterministic part plus ξ1 Υ_Δ.
double implied_v0(const ModelParams& params, double i0_sq, double remainder, double t);

}  // namespace afv::simulate
