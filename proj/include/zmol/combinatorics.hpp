#pragma once
// Partitions, compositions, multinomials and exponential Bell polynomials
// with exact big-integer coefficients.

#include <gmpxx.h>

#include <map>
#include <string>
#include <vector>

namespace zmol {

mpz_class factorial(int n);
mpz_class binomial(int n, int k);

// Sparse polynomial in x_1..x_arity with integer coefficients.
struct BellPoly {
    int arity = 0;
    std::map<std::vector<int>, mpz_class> terms;  // exponent vector -> coefficient

    static BellPoly constant(int arity, const mpz_class& c);
    static BellPoly variable(int arity, int i);  // x_i, 1-based

    BellPoly operator+(const BellPoly& o) const;
    BellPoly operator*(const BellPoly& o) const;
    BellPoly pow(int e) const;
    BellPoly with_arity(int a) const;  // pads or trims (trimmed slots must be zero)
    bool operator==(const BellPoly& o) const;

    mpz_class eval_ones() const;
    std::string to_string() const;  // e.g. "3*x1*x2 + x3"
};

// Multiplicity vectors (v_1..v_k) with sum i v_i = k, lexicographic.
std::vector<std::vector<int>> partitions(int k);
// Ordered n-tuples of nonnegative integers summing to k, lexicographic.
std::vector<std::vector<int>> compositions(int k, int n);
// Ordered m-tuples of positive integers summing to n.
std::vector<std::vector<int>> strict_compositions(int n, int m);
mpz_class multinomial(int n, const std::vector<int>& parts);

// B_{n,k} by B_{n,k} = sum_{i=1}^{n-k+1} C(n-1,i-1) x_i B_{n-i,k-1}; arity n-k+1.
BellPoly partial_bell(int n, int k);
// Same polynomial from the explicit sum over multiplicity vectors.
BellPoly partial_bell_direct(int n, int k);
// B_n = sum_k B_{n,k}, arity n.
BellPoly complete_bell(int n);
// B_{n+1} = sum_i C(n,i) B_{n-i} x_{i+1}, arity n.
BellPoly complete_bell_recursive(int n);
mpz_class bell_number(int n);

// sum over k_1+...+k_d = K of prod_m B_m(x_1..x_m)^{k_m}, arity d.
BellPoly bell_diagram_poly(int d, int K);
mpz_class bell_diagram_count(int d, int K);

// All set partitions of {0..n-1}; blocks sorted, partitions in canonical order.
std::vector<std::vector<std::vector<int>>> set_partitions(int n);

}  // namespace zmol
