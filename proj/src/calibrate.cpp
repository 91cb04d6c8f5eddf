#include "afv/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "afv/parallel.hpp"

namespace afv::calibrate {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

pricing::OptionSide parse_side(const std::string& s, int line) {
    std::string t = trim(s);
    std::transform(t.begin(), t.end(), t.begin(), ::tolower);
    if (t == "call") return pricing::OptionSide::Call;
    if (t == "put") return pricing::OptionSide::Put;
    throw std::runtime_error("load_quotes: line " + std::to_string(line) + ": side must be call or put");
}

}  // namespace

std::vector<const QuoteRecord*> QuoteSet::by_maturity(int days) const {
    std::vector<const QuoteRecord*> out;
    for (const auto& r : records)
        if (r.maturity_days == days) out.push_back(&r);
    return out;
}

QuoteSet make_quote_set(std::vector<QuoteRecord> records) {
    QuoteSet qs;
    qs.records = std::move(records);
    for (const auto& r : qs.records) {
        if (std::find(qs.maturities.begin(), qs.maturities.end(), r.maturity_days) == qs.maturities.end())
            qs.maturities.push_back(r.maturity_days);
    }
    std::sort(qs.maturities.begin(), qs.maturities.end());
    if (qs.maturities.size() > 8)
        throw std::runtime_error("quotes: at most 8 distinct maturities supported");
    return qs;
}

QuoteSet load_quotes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_quotes: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_quotes: empty file " + path);
    if (trim(line) != "quote_date,maturity_days,strike,side,mid_price")
        throw std::runtime_error("load_quotes: unexpected header: " + trim(line));

    std::vector<QuoteRecord> records;
    int lineno = 1;
    std::vector<std::tuple<int, double, int>> seen;  // (maturity, strike, side)
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string f[5];
        for (int i = 0; i < 5; ++i) {
            if (!std::getline(ss, f[i], ',')) {
                throw std::runtime_error("load_quotes: line " + std::to_string(lineno) + ": expected 5 fields");
            }
        }
        std::string extra;
        if (std::getline(ss, extra, ','))
            throw std::runtime_error("load_quotes: line " + std::to_string(lineno) + ": too many fields");
        QuoteRecord r;
        r.quote_date = trim(f[0]);
        try {
            r.maturity_days = std::stoi(trim(f[1]));
            r.strike = std::stod(trim(f[2]));
            r.mid_price = std::stod(trim(f[4]));
        } catch (const std::exception&) {
            throw std::runtime_error("load_quotes: line " + std::to_string(lineno) + ": malformed number");
        }
        r.side = parse_side(f[3], lineno);
        if (r.maturity_days <= 0)
            throw std::runtime_error("load_quotes: line " + std::to_string(lineno) + ": maturity_days must be positive");
        if (!(r.strike > 0.0))
            throw std::runtime_error("load_quotes: line " + std::to_string(lineno) + ": strike must be positive");
        if (r.mid_price < 0.0)
            throw std::runtime_error("load_quotes: line " + std::to_string(lineno) + ": mid_price must be nonnegative");
        const auto key = std::make_tuple(r.maturity_days, r.strike, static_cast<int>(r.side));
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw std::runtime_error("load_quotes: line " + std::to_string(lineno) + ": duplicate (maturity, strike, side)");
        seen.push_back(key);
        records.push_back(std::move(r));
    }
    if (records.empty()) throw std::runtime_error("load_quotes: no quotes in " + path);
    return make_quote_set(std::move(records));
}

void save_quotes(const QuoteSet& quotes, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_quotes: cannot open " + path);
    out << "quote_date,maturity_days,strike,side,mid_price\n";
    char buf[160];
    for (const auto& r : quotes.records) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%.12g,%s,%.12g\n", r.quote_date.c_str(), r.maturity_days,
                      r.strike, r.side == pricing::OptionSide::Call ? "call" : "put", r.mid_price);
        out << buf;
    }
}

double remainder_bound(double T, const CalibFixed& fixed) {
    return T * T / fixed.delta + 3.0 * fixed.varsigma;
}

std::shared_ptr<const charfn::SplineCF> SplineCache::get(double T, const CalibFixed& fixed) {
    const long long key = std::llround(T * 1e9);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    // any in-box vector works: the sinusoidal factor ignores it
    charfn::ModelParams params{levy::TemperedStableParams(0.1, 1.0, 0.5), levy::StableParams(fixed.alpha),
                               kernels::KernelSpec::type1(1.0, 0.75), 0.0, 0.04, fixed.delta, fixed.varsigma};
    charfn::ModelState st;
    st.i0_sq = fixed.i0_sq;
    st.varsigma = fixed.varsigma;
    auto sp = std::make_shared<charfn::SplineCF>(
        charfn::build_spline_cf(params, st, 0.0, T, 3000, 1e4, 0.0295));
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(key, sp);
    return sp;
}

namespace {

charfn::ModelParams params_from_vector(const CalibVector& v, const CalibFixed& fixed) {
    kernels::KernelSpec k = fixed.family == kernels::Family::TypeI
                                ? kernels::KernelSpec::type1(v.kappa, v.d)
                                : kernels::KernelSpec::type3(v.kappa, std::min(v.d, 1.0 - 1e-9));
    return charfn::ModelParams{levy::TemperedStableParams(v.a, v.b, v.c), levy::StableParams(fixed.alpha),
                               k, 0.0, 0.04, fixed.delta, fixed.varsigma};
}

}  // namespace

double objective(const CalibVector& v, const QuoteSet& quotes, const CalibFixed& fixed,
                 SplineCache* splines, std::vector<double>* residuals) {
    if (quotes.records.empty()) throw std::invalid_argument("objective: empty quote set");
    if (v.remainders.size() != quotes.maturities.size())
        throw std::invalid_argument("objective: one remainder per maturity required");
    const auto params = params_from_vector(v, fixed);

    double sse = 0.0;
    if (residuals) residuals->assign(quotes.records.size(), 0.0);
    for (std::size_t mi = 0; mi < quotes.maturities.size(); ++mi) {
        const int days = quotes.maturities[mi];
        const double T = days / 365.0;
        charfn::ModelState st;
        st.i0_sq = fixed.i0_sq;
        st.varsigma = fixed.varsigma;
        st.remainder = v.remainders[mi];
        std::shared_ptr<const charfn::SplineCF> sp;
        if (splines) sp = splines->get(T, fixed);
        charfn::AvgForwardVarianceCF cf(params, st, 0.0, T, sp);
        pricing::CachedCF cached(cf);
        for (std::size_t qi = 0; qi < quotes.records.size(); ++qi) {
            const auto& r = quotes.records[qi];
            if (r.maturity_days != days) continue;
            auto contract = pricing::ContractSpec::asym_option(r.side, 1.0, 1.0, r.strike, T, fixed.delta);
            const double model = pricing::asym_option_price(contract, cached).price;
            const double resid = r.mid_price - model;
            sse += resid * resid;
            if (residuals) (*residuals)[qi] = resid;
        }
    }
    return sse;
}

// ---------------------------------------------------------------------------
// Two-stage optimizer
// ---------------------------------------------------------------------------

namespace {

struct Coords {
    // flattened candidate: (a, b, c, d, kappa, r_1..r_n)
    std::vector<double> lo, hi;

    explicit Coords(const CalibConfig& cfg, const std::vector<int>& maturities) {
        lo = {cfg.box.a_lo, cfg.box.b_lo, cfg.box.c_lo, cfg.box.d_lo, cfg.box.kappa_lo};
        hi = {cfg.box.a_hi, cfg.box.b_hi, cfg.box.c_hi, cfg.box.d_hi, cfg.box.kappa_hi};
        for (int days : maturities) {
            const double bound = remainder_bound(days / 365.0, cfg.fixed);
            lo.push_back(-bound);
            hi.push_back(bound);
        }
    }

    std::size_t dim() const { return lo.size(); }

    void clip(std::vector<double>& x) const {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    }

    CalibVector to_vector(const std::vector<double>& x) const {
        CalibVector v;
        v.a = x[0];
        v.b = x[1];
        v.c = x[2];
        v.d = x[3];
        v.kappa = x[4];
        v.remainders.assign(x.begin() + 5, x.end());
        return v;
    }
};

}  // namespace

CalibResult calibrate(const QuoteSet& quotes, const CalibConfig& config) {
    if (config.population < 20) throw std::invalid_argument("calibrate: population must be at least 20");
    if (quotes.records.empty()) throw std::invalid_argument("calibrate: empty quote set");

    CalibResult out;
    const Coords coords(config, quotes.maturities);
    const std::size_t dim = coords.dim();
    SplineCache splines;

    // identifiability: candidate coordinates versus quotes per maturity
    for (int days : quotes.maturities) {
        if (quotes.by_maturity(days).size() < 2) {
            out.warnings.push_back("underdetermined: fewer than 2 quotes at maturity " + std::to_string(days) +
                                   " days for " + std::to_string(dim) + " parameters");
        }
    }

    long evals = 0;
    const auto run_objective = [&](const std::vector<double>& x) {
        return objective(coords.to_vector(x), quotes, config.fixed, &splines);
    };

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // stage 1: genetic algorithm (tournament selection, blend crossover,
    // Gaussian mutation decaying per generation)
    const long ga_budget = std::max<long>(config.population, static_cast<long>(0.55 * config.budget));
    std::vector<std::vector<double>> pop(config.population, std::vector<double>(dim));
    for (auto& member : pop)
        for (std::size_t i = 0; i < dim; ++i)
            member[i] = coords.lo[i] + u01(rng) * (coords.hi[i] - coords.lo[i]);

    std::vector<double> fitness(config.population, 0.0);
    const auto evaluate_population = [&](const std::vector<std::vector<double>>& members,
                                         std::vector<double>& fit) {
        parallel_for(members.size(), [&](std::size_t lo_i, std::size_t hi_i) {
            for (std::size_t i = lo_i; i < hi_i; ++i) fit[i] = run_objective(members[i]);
        });
        evals += static_cast<long>(members.size());
    };

    evaluate_population(pop, fitness);
    std::vector<double> best = pop[0];
    double best_f = fitness[0];
    for (int i = 1; i < config.population; ++i)
        if (fitness[i] < best_f) {
            best_f = fitness[i];
            best = pop[i];
        }
    out.stage1_trace.push_back(best_f);

    double sigma_scale = 0.10;
    for (int gen = 0; gen < config.generations && evals + config.population <= ga_budget; ++gen) {
        std::vector<std::vector<double>> next;
        next.reserve(config.population);
        // elitism: carry the two best
        std::vector<int> order(config.population);
        for (int i = 0; i < config.population; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int x, int y) { return fitness[x] < fitness[y]; });
        next.push_back(pop[order[0]]);
        next.push_back(pop[order[1]]);

        const auto tournament = [&]() -> const std::vector<double>& {
            int best_i = static_cast<int>(u01(rng) * config.population) % config.population;
            for (int t = 1; t < 3; ++t) {
                const int c = static_cast<int>(u01(rng) * config.population) % config.population;
                if (fitness[c] < fitness[best_i]) best_i = c;
            }
            return pop[best_i];
        };
        while (static_cast<int>(next.size()) < config.population) {
            const auto& p1 = tournament();
            const auto& p2 = tournament();
            std::vector<double> child(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                if (u01(rng) < config.crossover) {
                    const double mix = -0.25 + 1.5 * u01(rng);  // blend with expansion
                    child[i] = mix * p1[i] + (1.0 - mix) * p2[i];
                } else {
                    child[i] = p1[i];
                }
                child[i] += sigma_scale * (coords.hi[i] - coords.lo[i]) * gauss(rng) * (u01(rng) < 0.3 ? 1.0 : 0.0);
            }
            coords.clip(child);
            next.push_back(std::move(child));
        }
        pop = std::move(next);
        evaluate_population(pop, fitness);
        for (int i = 0; i < config.population; ++i)
            if (fitness[i] < best_f) {
                best_f = fitness[i];
                best = pop[i];
            }
        out.stage1_trace.push_back(best_f);
        sigma_scale *= 0.98;
    }

    // stage 2: generalized pattern search, coordinate polling from the GA best
    double mesh = 0.05;
    out.stage2_trace.push_back(best_f);
    while (mesh > config.mesh_tol && evals + static_cast<long>(2 * dim) <= config.budget) {
        std::vector<std::vector<double>> polls;
        polls.reserve(2 * dim);
        for (std::size_t i = 0; i < dim; ++i) {
            for (double sgn : {+1.0, -1.0}) {
                auto cand = best;
                cand[i] += sgn * mesh * (coords.hi[i] - coords.lo[i]);
                coords.clip(cand);
                polls.push_back(std::move(cand));
            }
        }
        std::vector<double> poll_f(polls.size());
        parallel_for(polls.size(), [&](std::size_t lo_i, std::size_t hi_i) {
            for (std::size_t i = lo_i; i < hi_i; ++i) poll_f[i] = run_objective(polls[i]);
        });
        evals += static_cast<long>(polls.size());

        std::size_t winner = polls.size();
        double wf = best_f;
        for (std::size_t i = 0; i < polls.size(); ++i)
            if (poll_f[i] < wf) {
                wf = poll_f[i];
                winner = i;
            }
        if (winner < polls.size()) {
            best = polls[winner];
            best_f = wf;
            mesh = std::min(mesh * 2.0, 0.2);  // expansion on success
        } else {
            mesh *= 0.5;
        }
        out.stage2_trace.push_back(best_f);
    }
    if (mesh > config.mesh_tol)
        out.warnings.push_back("budget exhausted before the pattern-search mesh tolerance");

    out.vector = coords.to_vector(best);
    // recompute from scratch: the reported RMSE must not rely on cached state
    std::vector<double> residuals;
    const double sse = objective(out.vector, quotes, config.fixed, nullptr, &residuals);
    ++evals;
    out.residuals = std::move(residuals);
    out.rmse = std::sqrt(sse / static_cast<double>(quotes.records.size()));
    out.objective_evals = evals;
    return out;
}

}  // namespace afv::calibrate
