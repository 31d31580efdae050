#pragma once
// Small numeric toolbox shared by every module: error types, real
// polynomials, Gauss-Legendre rules, compensated sums, number formatting.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace zmol {

// Math-level failure (bad argument, empty range, divergence). CLI exit code 1.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : DomainError {
    using DomainError::DomainError;
};
struct ResourceError : DomainError {
    using DomainError::DomainError;
};

// Dense real polynomial, c[i] is the coefficient of x^i.
struct Poly {
    std::vector<double> c;

    Poly() = default;
    explicit Poly(std::vector<double> coeffs) : c(std::move(coeffs)) {}

    double operator()(double x) const;
    Poly derivative() const;
    int degree() const;  // -1 for the zero polynomial
    Poly operator+(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly scaled(double s) const;
    Poly pow(int e) const;
};

// x + sum_j c_j x (1-x)^j, j = 1..n. Vanishes at 0 and equals 1 at 1.
Poly poly_x_one_minus_x(const std::vector<double>& c);
// c_0 + sum_{j>=1} c_j (1-2x)^(2j-1).
Poly poly_odd_basis(const std::vector<double>& c);

struct QuadRule {
    std::vector<double> x;  // nodes on [0,1]
    std::vector<double> w;
};
// n-point Gauss-Legendre rule mapped to [0,1]. Cached per n, thread-safe.
const QuadRule& gauss_legendre(int n);

// Integral over [a, inf) of f, for f decaying at least like 1/t^(1+eps).
// Geometric panels in log t, 32-point rule on each.
double integrate_to_infinity(const std::function<double(double)>& f, double a);

// Neumaier compensated accumulator in long double.
class KahanSum {
public:
    void add(long double v);
    long double value() const { return sum_ + comp_; }

private:
    long double sum_ = 0.0L;
    long double comp_ = 0.0L;
};

// %.17g, the shortest format that round-trips every double.
std::string fmt_double(double v);
std::string fmt_long_double(long double v);  // %.21Lg

// 64-bit FNV-1a, used for config digests in run manifests.
std::uint64_t fnv1a64(const std::string& bytes);

std::vector<int> parse_int_list(const std::string& s);  // "1,2,3" or ""
std::vector<double> parse_double_list(const std::string& s);

}  // namespace zmol
