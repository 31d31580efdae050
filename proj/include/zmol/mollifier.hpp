#pragma once
// Mollifier polynomials and coefficient tables.

#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "zmol/arith_sieve.hpp"
#include "zmol/numeric.hpp"

namespace zmol {

enum class PolyConstraint { P0, Pk, Q, Free };
enum class PolyBasis {
    Monomial,    // params[i] multiplies x^i
    XOneMinusX,  // x + sum_j params[j-1] x (1-x)^j
    OddPowers,   // params[0] + sum_{j>=1} params[j] (1-2x)^(2j-1)
};

struct PolySpec {
    PolyBasis basis = PolyBasis::Monomial;
    PolyConstraint constraint = PolyConstraint::Free;
    std::vector<double> params;

    Poly monomial() const;
    // Throws ConfigError when the constraint fails by more than tol.
    void validate(double tol = 1e-5) const;
    // Re-imposes the constraint through the coefficients it pins: c_0 of an
    // odd-basis Q (so Q(0) = 1), the constant of a monomial P, and for a
    // monomial P0 also the linear coefficient (so P(1) = 1).
    void normalize();
    // true for the coefficients normalize() overwrites
    std::vector<bool> fixed_mask() const;
};

std::string to_string(PolyBasis b);
std::string to_string(PolyConstraint c);
PolyBasis basis_from_string(const std::string& s);
PolyConstraint constraint_from_string(const std::string& s);

struct MollifierSpec {
    int d = 1;
    int K = 1;
    double theta = 4.0 / 7.0;
    std::map<std::vector<int>, PolySpec> polynomials;  // keyed by exponent vector
    bool squarefree_restricted = false;

    void validate() const;
};

struct MollifierPiece {
    std::vector<int> ell;
    FnTable table;          // (mu * Lambda_1^{*l_1} * ... )(n), unnormalized
    int sign = 1;           // (-1)^{|l|} (-1)^{sum r l_r}
    mpz_class multinomial;  // |l|! / prod l_r!
    int log_power = 0;      // sum r l_r, the log N normalization exponent
};

// One piece per exponent vector with |l| <= K, in lexicographic order of l.
std::vector<MollifierPiece> mollifier_coeff_tables(const MollifierSpec& spec, std::size_t n_max);

// b_F(n) = sum_{k=2}^K mu(n) S_k(n) / log^k N * P_k(log(N/n)/log N), where S_k(n) sums
// log p_1...log p_k over ordered k-tuples of distinct primes dividing a squarefree n.
// Zero for n > N. polys is keyed by k.
FnTable feng_coeffs(int K, std::size_t n_max, const std::map<int, PolySpec>& polys, double N);

struct PartialSumRow {
    std::size_t x;
    double unrestricted;
    double restricted;
    double difference;  // unrestricted - restricted
};
std::vector<PartialSumRow> partial_sum_compare(const ConvolutionSpec& spec, std::size_t x_max);

}  // namespace zmol
