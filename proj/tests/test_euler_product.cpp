#include <cmath>
#include <set>

#include "doctest.h"

#include "zmol/euler_product.hpp"
#include "zmol/numeric.hpp"

using namespace zmol;

namespace {

// sum_p (log p/(p-1))^2 from sum_{k>=2} (k-1) P''(k), P the prime zeta
// function, evaluated at 30 digits with mpmath and frozen here.
constexpr long double kS2 = 1.38560483848459000268L;

long double s2_term(long double t)
{
    const long double lg = std::log(t);
    return (lg / (t - 1.0L)) * (lg / (t - 1.0L));
}

// plain Eratosthenes, separate from the library sieve
std::vector<std::uint32_t> primes_upto(std::uint32_t n)
{
    std::vector<char> c(n + 1, 0);
    std::vector<std::uint32_t> p;
    for (std::uint32_t i = 2; i <= n; ++i) {
        if (c[i])
            continue;
        p.push_back(i);
        for (std::uint64_t j = static_cast<std::uint64_t>(i) * i; j <= n; j += i)
            c[j] = 1;
    }
    return p;
}

LogAPoint diagonal(int L, int Lb, double x)
{
    LogAPoint pt;
    pt.z.assign(L, 0.0);
    pt.w.assign(Lb, 0.0);
    pt.s = pt.u = pt.alpha = pt.beta = x / 2.0;
    return pt;
}

std::string key(const CatalogEntry& e)
{
    std::string k = to_string(e.family) + "/" + to_string(e.level) + "/";
    for (int o : e.orders)
        k += std::to_string(o);
    return k;
}

}  // namespace

TEST_CASE("truncated prime sum against an independent sieve")
{
    const std::uint32_t P = 1000000;
    KahanSum acc;
    for (std::uint32_t p : primes_upto(P))
        acc.add(s2_term(p));
    const PrimeSumResult r = prime_sum(s2_term, P, 1, false);
    CHECK(std::fabs(static_cast<double>(r.value - acc.value())) <= 1e-15);
    CHECK(r.tail_estimate == 0.0);
}

TEST_CASE("tail-corrected S2 converges to the prime zeta value")
{
    const PrimeSumResult a = prime_sum(s2_term, 1000000);
    const PrimeSumResult b = prime_sum(s2_term, 2000000);
    const PrimeSumResult c = prime_sum(s2_term, 10000000);
    // doubling the cutoff moves the value by less than the reported tail
    CHECK(std::fabs(static_cast<double>(b.value - a.value)) < a.tail_estimate);
    CHECK(std::fabs(static_cast<double>(c.value - b.value)) < b.tail_estimate);
    CHECK(std::fabs(static_cast<double>(c.value - kS2)) < 1e-9);
    CHECK(c.tail_estimate > 0.0);
    CHECK(c.tail_estimate < a.tail_estimate);
}

TEST_CASE("prime sums do not depend on the thread count")
{
    const PrimeSumResult one = prime_sum(s2_term, 3000000, 1);
    const PrimeSumResult four = prime_sum(s2_term, 3000000, 4);
    CHECK(one.value == four.value);
    CHECK(one.tail_estimate == four.tail_estimate);
}

TEST_CASE("closed form for the (1;1) entry is -S2")
{
    const PrimeSumResult r = a_derivative_closed_form(DerivFamily::D1L1, DerivLevel::A, {1, 1}, 0.0, 10000000);
    CHECK(std::fabs(static_cast<double>(r.value + kS2)) < 1e-9);
    CHECK(a_derivative_closed_form(DerivFamily::D1L1, DerivLevel::A, {1, 0}, 0.0, 1000).value == 0.0L);
    CHECK_THROWS_AS(a_derivative_closed_form(DerivFamily::D1L1, DerivLevel::A, {2, 0}, 0.0, 1000), DomainError);
    CHECK_THROWS_AS(a_derivative_closed_form(DerivFamily::D1L1, DerivLevel::A, {1, 1}, -0.6, 1000), DomainError);
}

TEST_CASE("Euler factor without shifts matches the ratio formula")
{
    // A_p = (1 - p^{-1-s-u})(1 - p^{-1-a-s} - p^{-1-b-u} + p^{-1-s-u})
    //       / ((1 - p^{-1-a-s})(1 - p^{-1-b-u}))
    LogAPoint pt;
    pt.s = 0.07;
    pt.u = -0.03;
    pt.alpha = 0.11;
    pt.beta = 0.02;
    for (long double p : {2.0L, 3.0L, 101.0L, 7919.0L}) {
        const long double su = std::pow(p, -(1.0L + pt.s + pt.u));
        const long double as = std::pow(p, -(1.0L + pt.alpha + pt.s));
        const long double bu = std::pow(p, -(1.0L + pt.beta + pt.u));
        const long double Ap = (1.0L - su) * (1.0L - as - bu + su) / ((1.0L - as) * (1.0L - bu));
        CHECK(std::fabs(static_cast<double>(log_A_prime_term(p, pt) - std::log(Ap))) < 1e-16);
    }
}

TEST_CASE("log A vanishes on the diagonal")
{
    for (double x : {0.0, 0.05, 0.2})
        for (auto [L, Lb] : std::vector<std::pair<int, int>>{{1, 1}, {2, 2}, {1, 2}}) {
            const PrimeSumResult r = log_A_numeric(diagonal(L, Lb, x), 1000000);
            CHECK(std::fabs(static_cast<double>(r.value)) <= std::max(r.tail_estimate, 1e-16));
        }
}

TEST_CASE("log A input checks")
{
    LogAPoint pt = diagonal(1, 1, 0.0);
    pt.s = -0.6;
    CHECK_THROWS_AS(log_A_prime_term(2.0L, pt), DomainError);
    CHECK_THROWS_AS(log_A_numeric(pt, 1000000), DomainError);
    CHECK_THROWS_AS(log_A_numeric(diagonal(1, 1, 0.0), 50), DomainError);
    CHECK_THROWS_AS(family_from_string("d3"), DomainError);
    CHECK_THROWS_AS(level_from_string("B"), DomainError);
}

TEST_CASE("uniform steps at (1;1) reproduce -S2")
{
    const PrimeSumResult fd =
        log_A_derivative_fd(DerivFamily::D1L1, {1, 1}, 0.0, 1e-3, 1000000, StepMode::Uniform);
    const PrimeSumResult cf = a_derivative_closed_form(DerivFamily::D1L1, DerivLevel::LogA, {1, 1}, 0.0, 1000000);
    CHECK(std::fabs(static_cast<double>(fd.value - cf.value)) < 1e-8);
}

TEST_CASE("derivative catalog against finite differences")
{
    // Entries whose printed value the finite differences contradict. The
    // check below asserts the disagreement, so a change in either side shows.
    const std::set<std::string> contradicted = {
        "d1l2/logA/1111", "d1l2/A/1111", "d2l11/logA/1010", "d2l11/logA/1002",
        "d2l11/logA/0202", "d2l11/logA/1211", "d2l11/logA/1212",
    };
    const double x = 0.1, h = 0.02;
    const std::uint64_t cutoff = 100000;
    int checked = 0;
    for (const auto& e : derivative_catalog()) {
        CAPTURE(key(e));
        const FaaDiBrunoCheck c = faa_di_bruno_check(e.family, e.level, e.orders, x, h, cutoff);
        if (contradicted.count(key(e))) {
            CHECK(c.abs_error > 1e-2 * std::max(1.0L, std::fabs(c.finite_diff)));
            continue;
        }
        if (e.form == ClosedForm::Zero) {
            CHECK(c.closed_form == 0.0L);
            CHECK(std::fabs(static_cast<double>(c.finite_diff)) <= 1e-5);
        } else {
            CHECK(c.abs_error <= 1e-3 * std::fabs(static_cast<double>(c.closed_form)));
        }
        ++checked;
    }
    CHECK(checked + static_cast<int>(contradicted.size()) == static_cast<int>(derivative_catalog().size()));
}

TEST_CASE("catalog lookup")
{
    const CatalogEntry* e = find_catalog_entry(DerivFamily::D1L2, DerivLevel::A, {1, 0, 1, 0});
    REQUIRE(e != nullptr);
    CHECK(e->form == ClosedForm::NegS2);
    CHECK(find_catalog_entry(DerivFamily::D1L2, DerivLevel::A, {2, 0, 0, 0}) == nullptr);
    CHECK(family_z_count(DerivFamily::D2L11) == 2);
    CHECK(family_w_count(DerivFamily::D1L1) == 1);
}
