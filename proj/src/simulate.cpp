#include "afv/simulate.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "afv/kernels.hpp"
#include "afv/parallel.hpp"
#include "afv/quad.hpp"
#include "afv/rng.hpp"

namespace afv::simulate {

namespace {

double sinusoidal_cos_weight(const ModelParams& p) {
    // ∫_0^Δ E[cos Z_u] du = 1 - e^{-Δ} for the symmetric stable Z;
    // the sine companion vanishes identically
    const double phi1 = levy::stable_char(p.stable, 1.0, 1.0);
    return (1.0 - std::pow(phi1, p.delta)) / (-std::log(phi1));
}

}  // namespace

void SimGrid::validate() const {
    if (!(T > 0.0)) throw std::invalid_argument("SimGrid: T must be positive");
    if (M < 2) throw std::invalid_argument("SimGrid: M must be at least 2");
    if (n_paths < 1) throw std::invalid_argument("SimGrid: n_paths must be positive");
}

PathSet simulate_inst_var(const ModelParams& params, const SimGrid& grid) {
    params.validate();
    grid.validate();
    const int M = grid.M;
    const double dt = grid.T / M;
    const double kappa = params.kernel.kappa, vs = params.v0, vb = params.vbar;

    std::vector<double> h(M + 1, 0.0);
    for (int j = 1; j <= M; ++j) h[j] = kernels::kernel_eval(params.kernel, j * dt);

    PathSet out;
    out.quantity = Quantity::InstVar;
    out.times.resize(M + 1);
    for (int n = 0; n <= M; ++n) out.times[n] = n * dt;
    out.values.assign(grid.n_paths, std::vector<double>(M + 1, 0.0));

    const double varsig = params.varsigma;
    parallel_for(grid.n_paths, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> x(M), z(M);
        for (std::size_t p = lo; p < hi; ++p) {
            RandomStream rng = RandomStream::substream(grid.seed, p);
            for (int k = 0; k < M; ++k) x[k] = levy::sample_ts_increment(params.ts, dt, rng);
            for (int k = 0; k < M; ++k) z[k] = levy::sample_stable_increment(params.stable, dt, rng);
            auto& row = out.values[p];
            double zsum = 0.0;
            row[0] = vs + varsig * 2.0;
            for (int n = 1; n <= M; ++n) {
                double jump = 0.0;
                for (int k = 0; k < n; ++k) jump += h[n - k] * x[k];
                zsum += z[n - 1];  // Σ_{k=1}^{n} Ž_k
                row[n] = vs * std::exp(-kappa * n * dt) + vb * (1.0 - std::exp(-kappa * n * dt)) + jump +
                         varsig * (std::cos(zsum) + 1.0);
            }
        }
    });
    return out;
}

PathSet simulate_avg_forward_variance(const ModelParams& params, const SimGrid& grid) {
    params.validate();
    grid.validate();
    const int M = grid.M;
    const double dt = grid.T / M;
    const double kappa = params.kernel.kappa, delta = params.delta;
    const double xi1 = levy::ts_moments(params.ts).first;
    const double ups = kernels::upsilon(params.kernel, delta);
    const double cw = sinusoidal_cos_weight(params);
    const double varsig = params.varsigma;

    std::vector<double> H(M + 1, 0.0);
    for (int j = 1; j <= M; ++j) H[j] = kernels::integrated_kernel(params.kernel, delta, j * dt);

    PathSet out;
    out.quantity = Quantity::AvgFwdVar;
    out.times.resize(M + 1);
    for (int n = 0; n <= M; ++n) out.times[n] = n * dt;
    out.values.assign(grid.n_paths, std::vector<double>(M + 1, 0.0));

    auto det_part = [&](double t) {
        const double e = (std::exp(-kappa * t) - std::exp(-kappa * (t + delta))) / (kappa * delta);
        return params.v0 * e + params.vbar * (1.0 - e);
    };

    parallel_for(grid.n_paths, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> x(M), z(M);
        for (std::size_t p = lo; p < hi; ++p) {
            RandomStream rng = RandomStream::substream(grid.seed, p);
            for (int k = 0; k < M; ++k) x[k] = levy::sample_ts_increment(params.ts, dt, rng);
            for (int k = 0; k < M; ++k) z[k] = levy::sample_stable_increment(params.stable, dt, rng);
            auto& row = out.values[p];
            row[0] = det_part(0.0) + xi1 * ups + varsig / delta * (cw + delta);
            double zsum = 0.0;  // Σ_{k=1}^{n-1} Ž_k, one increment behind the jump sum
            for (int n = 1; n <= M; ++n) {
                double jump = 0.0;
                for (int k = 0; k < n; ++k) jump += H[n - k] * x[k];
                if (n >= 2) zsum += z[n - 2];
                row[n] = det_part(n * dt) + jump + xi1 * ups +
                         varsig / delta * (cw * std::cos(zsum) + delta);
            }
        }
    });
    return out;
}

std::vector<std::vector<double>> simulate_inst_var_at(const ModelParams& params, const SimGrid& grid,
                                                      const std::vector<int>& indices) {
    params.validate();
    grid.validate();
    const int M = grid.M;
    const double dt = grid.T / M;
    const double kappa = params.kernel.kappa;
    const double varsig = params.varsigma;
    for (int idx : indices)
        if (idx < 0 || idx > M) throw std::invalid_argument("simulate_inst_var_at: index out of range");

    std::vector<double> h(M + 1, 0.0);
    for (int j = 1; j <= M; ++j) h[j] = kernels::kernel_eval(params.kernel, j * dt);

    std::vector<std::vector<double>> out(grid.n_paths, std::vector<double>(indices.size(), 0.0));
    parallel_for(grid.n_paths, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> x(M), zpre(M + 1);
        for (std::size_t p = lo; p < hi; ++p) {
            RandomStream rng = RandomStream::substream(grid.seed, p);
            for (int k = 0; k < M; ++k) x[k] = levy::sample_ts_increment(params.ts, dt, rng);
            zpre[0] = 0.0;
            for (int k = 1; k <= M; ++k)
                zpre[k] = zpre[k - 1] + levy::sample_stable_increment(params.stable, dt, rng);
            for (std::size_t q = 0; q < indices.size(); ++q) {
                const int n = indices[q];
                double jump = 0.0;
                for (int k = 0; k < n; ++k) jump += h[n - k] * x[k];
                out[p][q] = params.v0 * std::exp(-kappa * n * dt) +
                            params.vbar * (1.0 - std::exp(-kappa * n * dt)) + jump +
                            varsig * (std::cos(zpre[n]) + 1.0);
            }
        }
    });
    return out;
}

std::vector<double> simulate_terminal_avg_fwd_var(const ModelParams& params, const SimGrid& grid) {
    params.validate();
    grid.validate();
    const int M = grid.M;
    const double dt = grid.T / M;
    const double kappa = params.kernel.kappa, delta = params.delta;
    const double xi1 = levy::ts_moments(params.ts).first;
    const double ups = kernels::upsilon(params.kernel, delta);
    const double cw = sinusoidal_cos_weight(params);
    const double varsig = params.varsigma;

    std::vector<double> H(M + 1, 0.0);
    for (int j = 1; j <= M; ++j) H[j] = kernels::integrated_kernel(params.kernel, delta, j * dt);

    const double e = (std::exp(-kappa * grid.T) - std::exp(-kappa * (grid.T + delta))) / (kappa * delta);
    const double det = params.v0 * e + params.vbar * (1.0 - e) + xi1 * ups;

    std::vector<double> out(grid.n_paths, 0.0);
    parallel_for(grid.n_paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            RandomStream rng = RandomStream::substream(grid.seed, p);
            double jump = 0.0;
            for (int k = 0; k < M; ++k) jump += H[M - k] * levy::sample_ts_increment(params.ts, dt, rng);
            // Σ_{k=1}^{M-1} Ž_k in one draw: the stable increments aggregate
            const double zsum = levy::sample_stable_increment(params.stable, (M - 1) * dt, rng);
            out[p] = det + jump + varsig / delta * (cw * std::cos(zsum) + delta);
        }
    });
    return out;
}

double mean_inst_var(const ModelParams& params, double t) {
    const double xi1 = levy::ts_moments(params.ts).first;
    const double ez = levy::stable_char(params.stable, 1.0, t);
    return params.v0 * std::exp(-params.kernel.kappa * t) +
           params.vbar * (1.0 - std::exp(-params.kernel.kappa * t)) +
           xi1 * kernels::kernel_integral0(params.kernel, t) + params.varsigma * (ez + 1.0);
}

double var_inst_var(const ModelParams& params, double t) {
    const double xi2 = levy::ts_moments(params.ts).second;
    const double d = params.kernel.d, q = 2.0 * d - 1.0;
    const auto sub = [&](double w) {
        const double u = std::pow(w, 1.0 / q);
        const double h = kernels::kernel_eval(params.kernel, u);
        return h * h * std::pow(w, 1.0 / q - 1.0) / q;
    };
    double int_h2;
    if (params.kernel.family == kernels::Family::TypeIII && params.kernel.tau < t) {
        int_h2 = quad::adaptive(sub, 1e-300, std::pow(params.kernel.tau, q), 1e-13, 1e-12).value +
                 quad::adaptive([&](double u) {
                     const double h = kernels::kernel_eval(params.kernel, u);
                     return h * h;
                 }, params.kernel.tau, t, 1e-13, 1e-12).value;
    } else {
        int_h2 = quad::adaptive(sub, 1e-300, std::pow(t, q), 1e-13, 1e-12).value;
    }
    const double alpha = params.stable.alpha;
    const double var_cos = 0.5 * (1.0 + std::exp(-t * std::pow(2.0, alpha))) - std::exp(-2.0 * t);
    return xi2 * int_h2 + params.varsigma * params.varsigma * var_cos;
}

double mean_avg_forward_variance(const ModelParams& params, double t) {
    const double kappa = params.kernel.kappa, delta = params.delta;
    const double xi1 = levy::ts_moments(params.ts).first;
    const double e = (std::exp(-kappa * t) - std::exp(-kappa * (t + delta))) / (kappa * delta);
    charfn::ModelState probe;
    probe.varsigma = 0.0;
    charfn::AvgForwardVarianceCF cf(params, probe, 0.0, t);
    const double cw = sinusoidal_cos_weight(params);
    const double ez = levy::stable_char(params.stable, 1.0, t);
    return params.v0 * e + params.vbar * (1.0 - e) + xi1 * kernels::upsilon(params.kernel, delta) +
           xi1 * cf.integrated_H() + params.varsigma / delta * (cw * ez + delta);
}

double implied_v0(const ModelParams& params, double i0_sq, double remainder, double t) {
    const double kappa = params.kernel.kappa, delta = params.delta;
    const double xi1 = levy::ts_moments(params.ts).first;
    charfn::ModelState probe;
    probe.varsigma = 0.0;
    charfn::AvgForwardVarianceCF cf(params, probe, 0.0, t);
    const double j = i0_sq - xi1 * cf.integrated_H() + remainder;
    const double e = (std::exp(-kappa * t) - std::exp(-kappa * (t + delta))) / (kappa * delta);
    const double v0 = (j - xi1 * kernels::upsilon(params.kernel, delta) - params.vbar * (1.0 - e)) / e;
    if (!(v0 > 0.0))
        throw std::domain_error("implied_v0: the quoted state is inconsistent with a positive v0");
    return v0;
}

ConvergenceReport convergence_report(const ModelParams& params, double t, const std::vector<int>& m_list,
                                     int n_paths, std::uint64_t seed) {
    params.validate();
    if (m_list.size() < 3) throw std::invalid_argument("convergence_report: need at least 3 grid sizes");
    for (std::size_t i = 1; i < m_list.size(); ++i)
        if (m_list[i] <= m_list[i - 1]) throw std::invalid_argument("convergence_report: m_list must ascend");
    const int m_fine = m_list.back();
    for (int m : m_list)
        if (m_fine % m != 0)
            throw std::invalid_argument("convergence_report: grid sizes must divide the finest one");

    const double dt_fine = t / m_fine;
    const int n_m = static_cast<int>(m_list.size());

    // kernel weights per coarse grid
    std::vector<std::vector<double>> h(n_m);
    for (int i = 0; i < n_m; ++i) {
        const int m = m_list[i];
        h[i].assign(m + 1, 0.0);
        for (int j = 1; j <= m; ++j) h[i][j] = kernels::kernel_eval(params.kernel, j * t / m);
    }

    std::vector<std::vector<double>> vals(n_m, std::vector<double>(n_paths, 0.0));
    parallel_for(n_paths, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> xf(m_fine);
        std::vector<double> block(m_fine);
        for (std::size_t p = lo; p < hi; ++p) {
            RandomStream rng = RandomStream::substream(seed, p);
            double ztot = 0.0;
            for (int k = 0; k < m_fine; ++k) xf[k] = levy::sample_ts_increment(params.ts, dt_fine, rng);
            for (int k = 0; k < m_fine; ++k) ztot += levy::sample_stable_increment(params.stable, dt_fine, rng);
            for (int i = 0; i < n_m; ++i) {
                const int m = m_list[i];
                const int ratio = m_fine / m;
                double jump = 0.0;
                for (int k = 0; k < m; ++k) {
                    double b = 0.0;
                    for (int r = 0; r < ratio; ++r) b += xf[k * ratio + r];
                    jump += h[i][m - k] * b;
                }
                // Σ_{k=1}^{m} Ž at the terminal time aggregates to the same
                // total for every m
                vals[i][p] = params.v0 * std::exp(-params.kernel.kappa * t) +
                             params.vbar * (1.0 - std::exp(-params.kernel.kappa * t)) + jump +
                             params.varsigma * (std::cos(ztot) + 1.0);
            }
        }
    });

    const double m_exact = mean_inst_var(params, t);
    const double v_exact = var_inst_var(params, t);
    ConvergenceReport rep;
    rep.var_exact = v_exact;
    std::vector<double> lx, ly;
    for (int i = 0; i < n_m; ++i) {
        double s = 0.0, s2 = 0.0;
        for (double v : vals[i]) s += v;
        const double mean = s / n_paths;
        for (double v : vals[i]) s2 += (v - mean) * (v - mean);
        const double var = s2 / (n_paths - 1.0);
        ConvergenceRow row;
        row.M = m_list[i];
        row.bias = mean - m_exact;
        row.mse = row.bias * row.bias + var;
        row.excess = row.mse - v_exact;
        rep.rows.push_back(row);
        lx.push_back(std::log(static_cast<double>(row.M)));
        ly.push_back(std::log(std::abs(row.excess)));
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.slope = num / den;
    return rep;
}

}  // namespace afv::simulate
