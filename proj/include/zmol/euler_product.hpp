#pragma once
// The arithmetical factor A as a truncated prime sum: log A at arbitrary
// shifts, the catalog of closed-form diagonal derivatives, and a
// finite-difference cross-check through Faa di Bruno.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace zmol {

struct PrimeSumResult {
    long double value = 0.0L;     // truncated sum plus the tail correction
    std::uint64_t cutoff = 0;     // primes p <= cutoff were summed exactly
    double tail_estimate = 0.0;   // |tail correction|, >= 0
};

// sum_{p <= cutoff} f(p) + int_cutoff^inf f(t)/log t dt. Primes are summed in
// fixed blocks, each compensated, then reduced in block order, so the result
// does not depend on threads.
PrimeSumResult prime_sum(const std::function<long double(long double)>& f, std::uint64_t cutoff,
                         int threads = 1, bool with_tail = true);

struct LogAPoint {
    std::vector<double> z, w;  // shift variables, L and Lbar of them
    double s = 0.0, u = 0.0, alpha = 0.0, beta = 0.0;
};

// Per-prime summand of log A, evaluated at a real t (t = p for the sum).
// Throws DomainError when some exponent 1 + ... drops to 1/2 or below.
long double log_A_prime_term(long double t, const LogAPoint& pt);
PrimeSumResult log_A_numeric(const LogAPoint& pt, std::uint64_t cutoff, int threads = 1);

// The three catalogued diagonal families, named by their shift variables:
// D1L1 (z1; w1), D1L2 (z1, z2; w1, w2), D2L11 (z_{1,1}, z_{2,1}; w_{1,1}, w_{2,1}).
enum class DerivFamily { D1L1, D1L2, D2L11 };
enum class DerivLevel { LogA, A };
enum class ClosedForm {
    Zero,
    NegS2,         // -sum (log p / (X - 1))^2, X = p^{1+x}
    TwoS2Squared,  // 2 (sum (log p / (X - 1))^2)^2
    D2Mixed11,     // sum log^2 p / X - X log^2 p / (X - 1)^2
    D2Mixed12,     // sum X (1 + X) log^3 p / (X - 1)^3 - log^3 p / X
    D2Mixed22,     // sum log^4 p / X - X (1 + X (4 + X)) log^4 p / (X - 1)^4
};

struct CatalogEntry {
    DerivFamily family;
    DerivLevel level;
    std::vector<int> orders;  // derivative order per shift variable, z's first
    ClosedForm form;
};

const std::vector<CatalogEntry>& derivative_catalog();
const CatalogEntry* find_catalog_entry(DerivFamily f, DerivLevel l, const std::vector<int>& orders);

std::string to_string(DerivFamily f);
std::string to_string(DerivLevel l);
std::string to_string(ClosedForm c);
DerivFamily family_from_string(const std::string& s);
DerivLevel level_from_string(const std::string& s);
int family_z_count(DerivFamily f);
int family_w_count(DerivFamily f);

// Closed-form value at alpha + beta = x. Exact 0 for vanishing entries.
// Uncatalogued indices throw DomainError.
PrimeSumResult a_derivative_closed_form(DerivFamily f, DerivLevel l, const std::vector<int>& orders,
                                        double x, std::uint64_t cutoff, int threads = 1);

enum class StepMode {
    Uniform,    // the same step h in every shift variable, for every prime
    LogScaled,  // step h / log p, so every prime sees the same step in z log p
};

// Central differences of log A at the diagonal s = alpha = u = beta = x/2,
// applied prime by prime (and to the tail integrand) with one Richardson
// step (h, h/2). Orders up to 4 per variable.
PrimeSumResult log_A_derivative_fd(DerivFamily f, const std::vector<int>& orders, double x, double h,
                                   std::uint64_t cutoff, StepMode mode, int threads = 1);

struct FaaDiBrunoCheck {
    long double closed_form = 0.0L;
    long double finite_diff = 0.0L;
    double abs_error = 0.0;
};

// Closed form against finite differences. For level A the log A derivatives of
// every block of every set partition of the derivative slots are differenced
// and combined, using A = exp(log A) and log A = 0 at the diagonal.
FaaDiBrunoCheck faa_di_bruno_check(DerivFamily f, DerivLevel l, const std::vector<int>& orders, double x,
                                   double h, std::uint64_t cutoff, StepMode mode = StepMode::LogScaled,
                                   int threads = 1);

}  // namespace zmol
