#include "afv/quad.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace afv::quad {

namespace {

// Newton iteration on the Legendre polynomial; standard gauleg construction.
GaussRule make_rule(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        r.w[n - 1 - i] = r.w[i];
    }
    return r;
}

std::map<int, GaussRule> g_rules;
std::mutex g_rules_mutex;

}  // namespace

const GaussRule& gauss_rule(int n) {
    if (n < 1) throw std::invalid_argument("gauss_rule: n must be positive");
    std::lock_guard<std::mutex> lock(g_rules_mutex);
    auto it = g_rules.find(n);
    if (it == g_rules.end()) it = g_rules.emplace(n, make_rule(n)).first;
    return it->second;
}

namespace {

struct Panel {
    double a, b, value, error;
};

void eval_panel(const std::function<double(double)>& f, Panel& p) {
    const double coarse = gauss(f, p.a, p.b, 15);
    const double fine = gauss(f, p.a, p.b, 31);
    p.value = fine;
    p.error = std::abs(fine - coarse);
}

}  // namespace

AdaptiveResult adaptive(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol, int max_depth) {
    AdaptiveResult out;
    if (a == b) return out;
    std::vector<std::pair<Panel, int>> stack;
    Panel root{a, b, 0.0, 0.0};
    eval_panel(f, root);
    stack.push_back({root, 0});
    while (!stack.empty()) {
        auto [p, depth] = stack.back();
        stack.pop_back();
        const double tol = abs_tol + rel_tol * std::abs(p.value);
        if (p.error <= tol || depth >= max_depth) {
            out.value += p.value;
            out.error += p.error;
            ++out.panels;
            continue;
        }
        const double mid = 0.5 * (p.a + p.b);
        Panel left{p.a, mid, 0.0, 0.0}, right{mid, p.b, 0.0, 0.0};
        eval_panel(f, left);
        eval_panel(f, right);
        stack.push_back({left, depth + 1});
        stack.push_back({right, depth + 1});
    }
    return out;
}

double sph_bessel_j(int n, double x) {
    if (n < 0) throw std::invalid_argument("sph_bessel_j: negative order");
    if (x < 0.0) throw std::invalid_argument("sph_bessel_j: negative argument");
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    if (x < 1e-4) {
        // j_n(x) ~ x^n/(2n+1)!! (1 - x^2/(2(2n+3)))
        double dfact = 1.0;
        for (int k = 2 * n + 1; k > 1; k -= 2) dfact *= k;
        return std::pow(x, n) / dfact * (1.0 - x * x / (2.0 * (2.0 * n + 3.0)));
    }
    const double j0 = std::sin(x) / x;
    if (n == 0) return j0;
    const double j1 = j0 / x - std::cos(x) / x;
    if (n == 1) return j1;
    if (x > n + 0.5) {
        // upward recurrence is stable below the turning point
        double jm = j0, jc = j1;
        for (int k = 1; k < n; ++k) {
            const double jn = (2.0 * k + 1.0) / x * jc - jm;
            jm = jc;
            jc = jn;
        }
        return jc;
    }
    // downward (Miller) recurrence, normalized with j0
    const int start = n + 16 + static_cast<int>(std::sqrt(40.0 * n));
    double up = 0.0, cur = 1e-30, target = 0.0;
    for (int k = start; k >= 1; --k) {
        const double down = (2.0 * k + 1.0) / x * cur - up;
        up = cur;
        cur = down;
        if (k - 1 == n) target = cur;
        if (std::abs(cur) > 1e250) {  // rescale to avoid overflow
            up /= 1e250;
            cur /= 1e250;
            target /= 1e250;
        }
    }
    return target * (j0 / cur);
}

std::vector<double> bessel_j_array(int kmax, double x) {
    std::vector<double> out(kmax + 1, 0.0);
    if (x < 0.0) throw std::invalid_argument("bessel_j_array: negative argument");
    if (x < 1e-8) {
        out[0] = 1.0;
        if (kmax >= 1) out[1] = 0.5 * x;
        return out;
    }
    if (x > kmax + 12.0) {
        out[0] = j0(x);
        if (kmax >= 1) out[1] = j1(x);
        for (int k = 1; k < kmax; ++k) out[k + 1] = 2.0 * k / x * out[k] - out[k - 1];
        return out;
    }
    // Miller downward sweep normalized by J_0 + 2 Σ J_{2k} = 1
    const int start = kmax + static_cast<int>(std::ceil(x)) + 32;
    double up = 0.0, cur = 1e-30, norm = 0.0;
    for (int k = start; k >= 1; --k) {
        const double down = 2.0 * k / x * cur - up;
        up = cur;
        cur = down;
        if (k - 1 <= kmax) out[k - 1] = cur;
        if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
        if (std::abs(cur) > 1e250) {
            up /= 1e250;
            cur /= 1e250;
            norm /= 1e250;
            for (auto& v : out) v /= 1e250;
        }
    }
    norm += cur;  // J_0 term
    for (auto& v : out) v /= norm;
    return out;
}

OscPanel::OscPanel(int nodes) : n_(nodes), rule_(&gauss_rule(nodes)) {
    legendre_.resize(static_cast<std::size_t>(n_) * n_);
    for (int i = 0; i < n_; ++i) {
        const double x = rule_->x[i];
        double p0 = 1.0, p1 = x;
        legendre_[0 * n_ + i] = p0;
        if (n_ > 1) legendre_[1 * n_ + i] = p1;
        for (int k = 2; k < n_; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            legendre_[static_cast<std::size_t>(k) * n_ + i] = p2;
            p0 = p1;
            p1 = p2;
        }
    }
}

std::vector<double> OscPanel::points(double a, double b) const {
    std::vector<double> pts(n_);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < n_; ++i) pts[i] = c + h * rule_->x[i];
    return pts;
}

std::complex<double> OscPanel::integrate(const std::vector<std::complex<double>>& s_vals,
                                         double a, double b, double omega,
                                         double* coeff_tail) const {
    if (static_cast<int>(s_vals.size()) != n_)
        throw std::invalid_argument("OscPanel::integrate: wrong sample count");
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double theta = omega * h;

    // Legendre coefficients a_k = (2k+1)/2 Σ w_i P_k(x_i) s(x_i)
    std::vector<std::complex<double>> coef(n_);
    double total = 0.0;
    for (int k = 0; k < n_; ++k) {
        std::complex<double> s = 0.0;
        for (int i = 0; i < n_; ++i) s += rule_->w[i] * legendre_[static_cast<std::size_t>(k) * n_ + i] * s_vals[i];
        coef[k] = 0.5 * (2.0 * k + 1.0) * s;
        total += std::abs(coef[k]);
    }
    if (coeff_tail) {
        const double tail = std::abs(coef[n_ - 1]) + std::abs(coef[n_ - 2]);
        *coeff_tail = total > 0.0 ? tail / total : 0.0;
    }

    // ∫ P_k(x) e^{iθx} dx = 2 i^k j_k(θ); j_k(-θ) = (-1)^k j_k(θ)
    const double at = std::abs(theta);
    const std::complex<double> I(0.0, 1.0);
    std::complex<double> sum = 0.0;
    std::complex<double> ipow(1.0, 0.0);
    for (int k = 0; k < n_; ++k) {
        double jk = sph_bessel_j(k, at);
        if (theta < 0.0 && (k & 1)) jk = -jk;
        sum += coef[k] * 2.0 * ipow * jk;
        ipow *= I;
    }
    return h * std::exp(I * (omega * c)) * sum;
}

}  // namespace afv::quad
