#pragma once
// Derivative-free maximization of kappa over mollifier coefficients and R.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "zmol/config.hpp"

namespace zmol {

// One free coordinate: a polynomial coefficient (1-based position in the
// params vector of piece `target`, or of Q when target == "Q"), or R.
struct FreeParam {
    std::string target;  // piece name, "Q" or "R"
    int index = 0;       // 1-based; unused for R
    double lo = -10.0, hi = 10.0;

    std::string label() const;  // "P2:3", "Q:2", "R"
};

// "P1:1-4,P2:*,Q:*,R". '*' selects every coefficient the constraints leave free.
// Naming a pinned coefficient is a ConfigError.
std::vector<FreeParam> parse_free_spec(const std::string& spec, const KappaConfig& cfg);

double get_param(const KappaConfig& cfg, const FreeParam& p);
// Sets the value and re-normalizes the affected polynomial.
void set_param(KappaConfig& cfg, const FreeParam& p, double v);

struct OptimizationProblem {
    KappaConfig base;
    std::vector<FreeParam> free;
    std::uint64_t seed = 1;
    int budget = 500;    // kappa evaluations over all restarts
    int restarts = 4;    // restart 0 starts at base, the others at seeded perturbations
    int threads = 1;
};

struct TraceRow {
    int evaluation = 0;
    int restart = 0;
    double kappa = 0.0;  // NaN-free: inadmissible points are recorded as -inf
    std::vector<double> params;
};

struct OptimizationResult {
    KappaConfig best;
    double best_kappa = 0.0;
    double start_kappa = 0.0;
    std::vector<TraceRow> trace;  // restart order, then evaluation order
    bool budget_exhausted = false;  // some simplex had not converged
};

OptimizationResult optimize_kappa(const OptimizationProblem& problem);

std::string trace_csv(const OptimizationResult& r, const std::vector<FreeParam>& free);

// kappa along one coordinate ("R", "theta" or a FreeParam label), with the
// rest of cfg fixed. Inadmissible points give -inf.
std::vector<std::pair<double, double>> evaluate_profile(const KappaConfig& cfg, const std::string& parameter,
                                                        const std::vector<double>& grid, int threads = 1);

}  // namespace zmol
