#include <cmath>
#include <sstream>

#include "doctest.h"

#include "zmol/main_terms.hpp"
#include "zmol/optimizer.hpp"

using namespace zmol;

namespace {

const std::string kConfigs = ZMOL_CONFIG_DIR;

// Levinson's c(R) for P = x, Q = 1 - x, theta = 1/2 in closed form:
// 1 + (1/theta) int int e^{2Rv} ((1-v)(1 + R theta u) - theta u)^2 du dv,
// with the u integral done exactly and v by Simpson.
double levinson_kappa(double R)
{
    const double th = 0.5;
    const int n = 2000;
    auto f = [&](double v) {
        // int_0^1 (a + b u)^2 du with a = 1-v, b = R theta (1-v) - theta
        const double a = 1 - v, b = R * th * (1 - v) - th;
        return std::exp(2 * R * v) * (a * a + a * b + b * b / 3.0);
    };
    double s = f(0) + f(1);
    for (int i = 1; i < n; ++i)
        s += f(static_cast<double>(i) / n) * (i % 2 ? 4.0 : 2.0);
    const double c = 1.0 + s / (3.0 * n) / th;
    return 1.0 - std::log(c) / R;
}

double golden_max(double (*f)(double), double a, double b)
{
    const double g = (std::sqrt(5.0) - 1) / 2;
    double x1 = b - g * (b - a), x2 = a + g * (b - a), f1 = f(x1), f2 = f(x2);
    while (b - a > 1e-9) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("free parameter parsing")
{
    const KappaConfig feng = KappaConfig::load(kConfigs + "/feng_k3.json");
    const auto fp = parse_free_spec("P2:*,Q:2-3,R", feng);
    // P2 is monomial with P(0) = 0, so coefficient 1 is pinned
    REQUIRE(fp.size() == 6);
    CHECK(fp[0].label() == "P2:2");
    CHECK(fp[3].label() == "Q:2");
    CHECK(fp[5].label() == "R");
    CHECK_THROWS_AS(parse_free_spec("P2:1", feng), ConfigError);
    CHECK_THROWS_AS(parse_free_spec("P9:2", feng), ConfigError);
    CHECK_THROWS_AS(parse_free_spec("P2:7", feng), ConfigError);
    CHECK_THROWS_AS(parse_free_spec("P2", feng), ConfigError);
    CHECK_THROWS_AS(parse_free_spec("R,R", feng), ConfigError);
    CHECK_THROWS_AS(parse_free_spec("P2:x", feng), ConfigError);
}

TEST_CASE("set_param keeps constraints")
{
    KappaConfig cfg = KappaConfig::load(kConfigs + "/feng_k3.json");
    const auto fp = parse_free_spec("Q:2", cfg);
    set_param(cfg, fp[0], 0.7);
    CHECK(get_param(cfg, fp[0]) == 0.7);
    CHECK(cfg.Q.monomial()(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("R-only optimization of the Levinson setup")
{
    const KappaConfig base = KappaConfig::load(kConfigs + "/levinson.json");
    OptimizationProblem pb;
    pb.base = base;
    pb.free = parse_free_spec("R", base);
    pb.budget = 80;
    pb.restarts = 1;
    const OptimizationResult r = optimize_kappa(pb);
    const double Rstar = golden_max(levinson_kappa, 0.5, 3.0);
    CHECK(r.best.R == doctest::Approx(Rstar).epsilon(1e-4));
    CHECK(r.best_kappa == doctest::Approx(levinson_kappa(Rstar)).epsilon(1e-9));
    CHECK(r.best_kappa >= r.start_kappa);
    CHECK(r.start_kappa == doctest::Approx(levinson_kappa(1.3)).epsilon(1e-9));
}

TEST_CASE("optimizer is deterministic and never loses ground")
{
    const KappaConfig base = KappaConfig::load(kConfigs + "/simple_zeros.json");
    OptimizationProblem pb;
    pb.base = base;
    pb.free = parse_free_spec("P2:2,P3:2-3,R", base);
    pb.budget = 40;
    pb.restarts = 2;
    pb.seed = 7;
    const OptimizationResult a = optimize_kappa(pb);
    pb.threads = 2;
    const OptimizationResult b = optimize_kappa(pb);
    CHECK(a.best_kappa == b.best_kappa);
    CHECK(a.best.to_json() == b.best.to_json());
    CHECK(trace_csv(a, pb.free) == trace_csv(b, pb.free));
    CHECK(a.best_kappa >= a.start_kappa);
    CHECK_NOTHROW(a.best.validate());
    CHECK(a.trace.size() <= 40);
    for (const auto& row : a.trace)
        CHECK(row.kappa <= a.best_kappa);

    std::istringstream csv(trace_csv(a, pb.free));
    std::string header;
    std::getline(csv, header);
    CHECK(header == "iteration,restart,kappa,P2:2,P3:2,P3:3,R");

    pb.budget = 0;
    CHECK_THROWS_AS(optimize_kappa(pb), ConfigError);
}

TEST_CASE("kappa profiles")
{
    const KappaConfig lev = KappaConfig::load(kConfigs + "/levinson.json");
    const auto one = evaluate_profile(lev, "R", {1.3});
    REQUIRE(one.size() == 1);
    CHECK(one[0].second == doctest::Approx(assemble_main_term(lev).kappa).epsilon(1e-14));

    // a longer mollifier does not hurt
    const auto th = evaluate_profile(lev, "theta", {0.5, 6.0 / 11.0, 4.0 / 7.0});
    CHECK(th[0].second <= th[1].second);
    CHECK(th[1].second <= th[2].second);

    // inadmissible points are -inf rather than errors
    const auto bad = evaluate_profile(lev, "theta", {0.9});
    CHECK(std::isinf(bad[0].second));

    const auto a = evaluate_profile(lev, "R", {0.8, 1.0, 1.2, 1.4}, 1);
    const auto b = evaluate_profile(lev, "R", {0.8, 1.0, 1.2, 1.4}, 3);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i].second == b[i].second);

    CHECK_THROWS_AS(evaluate_profile(lev, "R", {}), DomainError);
    CHECK_THROWS_AS(evaluate_profile(lev, "P1:*", {0.1}), ConfigError);
}
