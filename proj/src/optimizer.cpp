#include "zmol/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "zmol/main_terms.hpp"
#include "zmol/numeric.hpp"

namespace zmol {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

PolySpec& poly_of(KappaConfig& cfg, const std::string& target)
{
    if (target == "Q")
        return cfg.Q;
    for (auto& p : cfg.pieces)
        if (p.name == target)
            return p.poly;
    throw ConfigError("no polynomial named '" + target + "'");
}

const PolySpec& poly_of(const KappaConfig& cfg, const std::string& target)
{
    return poly_of(const_cast<KappaConfig&>(cfg), target);
}

double evaluate(const KappaConfig& base, const std::vector<FreeParam>& free, const std::vector<double>& x)
{
    KappaConfig cfg = base;
    for (std::size_t i = 0; i < free.size(); ++i)
        set_param(cfg, free[i], x[i]);
    try {
        const double k = assemble_main_term(cfg).kappa;
        return std::isfinite(k) ? k : kNegInf;
    } catch (const DomainError&) {
        return kNegInf;
    }
}

struct RestartOutcome {
    std::vector<TraceRow> trace;
    std::vector<double> best_x;
    double best_kappa = kNegInf;
    bool converged = false;
};

RestartOutcome nelder_mead(const OptimizationProblem& pb, int restart, int budget)
{
    const auto& free = pb.free;
    const std::size_t n = free.size();
    std::vector<double> x0(n);
    for (std::size_t i = 0; i < n; ++i)
        x0[i] = get_param(pb.base, free[i]);
    if (restart > 0) {
        std::mt19937_64 rng(pb.seed * 1000003ULL + static_cast<std::uint64_t>(restart));
        std::normal_distribution<double> nd(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i)
            x0[i] += 0.05 * (1.0 + std::fabs(x0[i])) * nd(rng);
    }
    auto clamp = [&](std::vector<double> x) {
        for (std::size_t i = 0; i < n; ++i)
            x[i] = std::min(std::max(x[i], free[i].lo), free[i].hi);
        return x;
    };

    RestartOutcome out;
    int evals = 0;
    // objective to minimize is -kappa
    auto f = [&](const std::vector<double>& xr) {
        const std::vector<double> x = clamp(xr);
        const double k = evaluate(pb.base, free, x);
        ++evals;
        out.trace.push_back({0, restart, k, x});
        if (k > out.best_kappa) {
            out.best_kappa = k;
            out.best_x = x;
        }
        return -k;
    };

    std::vector<std::vector<double>> simplex{clamp(x0)};
    std::vector<double> fv{f(simplex[0])};
    if (n == 0) {
        out.converged = true;
        return out;
    }
    for (std::size_t i = 0; i < n && evals < budget; ++i) {
        std::vector<double> x = simplex[0];
        x[i] += 0.1 * std::max(std::fabs(x[i]), 0.1);
        simplex.push_back(clamp(x));
        fv.push_back(f(simplex.back()));
    }
    if (simplex.size() < n + 1)
        return out;

    while (evals < budget) {
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i)
            idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (std::size_t i : idx) {
            s2.push_back(simplex[i]);
            f2.push_back(fv[i]);
        }
        simplex.swap(s2);
        fv.swap(f2);

        double diam = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                diam = std::max(diam, std::fabs(simplex[i][j] - simplex[0][j]));
        if (std::isfinite(fv[0]) && std::fabs(fv[n] - fv[0]) <= 1e-13 * (1.0 + std::fabs(fv[0])) && diam < 1e-9) {
            out.converged = true;
            break;
        }

        std::vector<double> cen(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                cen[j] += simplex[i][j] / static_cast<double>(n);
        auto along = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j)
                x[j] = cen[j] + t * (simplex[n][j] - cen[j]);
            return clamp(x);
        };
        const std::vector<double> xr = along(-1.0);
        const double fr = f(xr);
        if (fr < fv[0]) {
            if (evals >= budget) {
                simplex[n] = xr;
                fv[n] = fr;
                break;
            }
            const std::vector<double> xe = along(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
            continue;
        }
        if (fr < fv[n - 1]) {
            simplex[n] = xr;
            fv[n] = fr;
            continue;
        }
        if (evals >= budget)
            break;
        const bool outside = fr < fv[n];
        const std::vector<double> xc = along(outside ? -0.5 : 0.5);
        const double fc = f(xc);
        if (fc < (outside ? fr : fv[n])) {
            simplex[n] = xc;
            fv[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        for (std::size_t i = 1; i <= n && evals < budget; ++i) {
            for (std::size_t j = 0; j < n; ++j)
                simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
            simplex[i] = clamp(simplex[i]);
            fv[i] = f(simplex[i]);
        }
    }
    return out;
}

}  // namespace

std::string FreeParam::label() const
{
    if (target == "R")
        return "R";
    return target + ":" + std::to_string(index);
}

std::vector<FreeParam> parse_free_spec(const std::string& spec, const KappaConfig& cfg)
{
    std::vector<FreeParam> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        if (item == "R") {
            out.push_back({"R", 0, 0.05, 5.0});
            continue;
        }
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("free parameter '" + item + "' needs the form NAME:indices");
        const std::string name = item.substr(0, colon), sel = item.substr(colon + 1);
        const PolySpec& p = poly_of(cfg, name);
        const std::vector<bool> fixed = p.fixed_mask();
        const int m = static_cast<int>(p.params.size());
        std::vector<int> picks;
        if (sel == "*") {
            for (int i = 1; i <= m; ++i)
                if (!fixed[i - 1])
                    picks.push_back(i);
        } else {
            const auto dash = sel.find('-');
            try {
                if (dash == std::string::npos) {
                    picks.push_back(std::stoi(sel));
                } else {
                    const int a = std::stoi(sel.substr(0, dash)), b = std::stoi(sel.substr(dash + 1));
                    for (int i = a; i <= b; ++i)
                        picks.push_back(i);
                }
            } catch (const std::logic_error&) {
                throw ConfigError("bad index selection '" + sel + "'");
            }
        }
        for (int i : picks) {
            if (i < 1 || i > m)
                throw ConfigError("coefficient " + name + ":" + std::to_string(i) + " does not exist");
            if (fixed[i - 1])
                throw ConfigError("coefficient " + name + ":" + std::to_string(i) + " is pinned by a constraint");
            out.push_back({name, i, -10.0, 10.0});
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (out[i].label() == out[j].label())
                throw ConfigError("free parameter " + out[i].label() + " listed twice");
    return out;
}

double get_param(const KappaConfig& cfg, const FreeParam& p)
{
    if (p.target == "R")
        return cfg.R;
    return poly_of(cfg, p.target).params.at(static_cast<std::size_t>(p.index - 1));
}

void set_param(KappaConfig& cfg, const FreeParam& p, double v)
{
    if (p.target == "R") {
        cfg.R = v;
        return;
    }
    PolySpec& poly = poly_of(cfg, p.target);
    poly.params.at(static_cast<std::size_t>(p.index - 1)) = v;
    poly.normalize();
}

OptimizationResult optimize_kappa(const OptimizationProblem& pb)
{
    pb.base.validate();
    if (pb.budget < 1)
        throw ConfigError("optimizer budget must be >= 1");
    if (pb.restarts < 1)
        throw ConfigError("optimizer needs at least one restart");
    OptimizationResult res;
    res.start_kappa = assemble_main_term(pb.base).kappa;

    const int nr = pb.restarts;
    const int per = std::max(pb.budget / nr, static_cast<int>(pb.free.size()) + 2);
    std::vector<RestartOutcome> outs(nr);
    std::vector<std::exception_ptr> errs(nr);
    auto run = [&](int r) {
        try {
            outs[r] = nelder_mead(pb, r, per);
        } catch (...) {
            errs[r] = std::current_exception();
        }
    };
    const int nt = std::max(1, std::min(pb.threads, nr));
    if (nt == 1) {
        for (int r = 0; r < nr; ++r)
            run(r);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t)
            pool.emplace_back([&, t] {
                for (int r = t; r < nr; r += nt)
                    run(r);
            });
        for (auto& th : pool)
            th.join();
    }
    for (auto& e : errs)
        if (e)
            std::rethrow_exception(e);

    res.best = pb.base;
    res.best_kappa = res.start_kappa;
    int evaluation = 0;
    for (int r = 0; r < nr; ++r) {
        for (auto row : outs[r].trace) {
            row.evaluation = evaluation++;
            res.trace.push_back(std::move(row));
        }
        if (!outs[r].converged)
            res.budget_exhausted = true;
        // strict improvement only, so ties keep the earlier restart
        if (outs[r].best_kappa > res.best_kappa) {
            res.best_kappa = outs[r].best_kappa;
            KappaConfig cfg = pb.base;
            for (std::size_t i = 0; i < pb.free.size(); ++i)
                set_param(cfg, pb.free[i], outs[r].best_x[i]);
            res.best = cfg;
        }
    }
    return res;
}

std::string trace_csv(const OptimizationResult& r, const std::vector<FreeParam>& free)
{
    std::string s = "iteration,restart,kappa";
    for (const auto& p : free)
        s += "," + p.label();
    s += "\n";
    for (const auto& row : r.trace) {
        s += std::to_string(row.evaluation) + "," + std::to_string(row.restart) + "," + fmt_double(row.kappa);
        for (double v : row.params)
            s += "," + fmt_double(v);
        s += "\n";
    }
    return s;
}

std::vector<std::pair<double, double>> evaluate_profile(const KappaConfig& cfg, const std::string& parameter,
                                                        const std::vector<double>& grid, int threads)
{
    if (grid.empty())
        throw DomainError("evaluate_profile: empty grid");
    std::vector<FreeParam> fp;
    if (parameter != "theta" && parameter != "R")
        fp = parse_free_spec(parameter, cfg);
    if (parameter != "theta" && parameter != "R" && fp.size() != 1)
        throw ConfigError("evaluate_profile: '" + parameter + "' must name exactly one coordinate");
    std::vector<std::pair<double, double>> out(grid.size());
    auto work = [&](std::size_t i) {
        KappaConfig c = cfg;
        if (parameter == "theta") {
            c.theta = grid[i];
            c.theta_text.clear();
        } else if (parameter == "R") {
            c.R = grid[i];
        } else {
            set_param(c, fp[0], grid[i]);
        }
        double k = kNegInf;
        try {
            k = assemble_main_term(c).kappa;
        } catch (const DomainError&) {
        }
        out[i] = {grid[i], k};
    };
    const int nt = std::max(1, threads);
    if (nt == 1) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            work(i);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t i = static_cast<std::size_t>(t); i < grid.size(); i += static_cast<std::size_t>(nt))
                    work(i);
            });
        for (auto& th : pool)
            th.join();
    }
    return out;
}

}  // namespace zmol
