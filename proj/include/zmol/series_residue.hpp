#pragma once
// Exact multivariate residue engine. Expands the ratio-of-zetas integrand in
// the shift variables z_{q,i}, w_{q,j} and reads off the coefficient at
// prod z^q w^q as a polynomial in the logarithmic-derivative ratios
// zeta^(j)/zeta at the three base points 1+s+u, 1+alpha+s, 1+beta+u.

#include <array>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace zmol {

enum class Base { SU = 0, AS = 1, BU = 2 };
std::string to_string(Base b);

struct RatioSymbol {
    Base base = Base::SU;
    int order = 1;  // >= 1; order 0 is the unit
    bool operator<(const RatioSymbol& o) const;
    bool operator==(const RatioSymbol& o) const { return base == o.base && order == o.order; }
};

// prod_j (zeta^(j)/zeta)(base)^{powers[base][j-1]}, optionally times the
// formal derivative A^{(atag)} of the arithmetical factor.
struct RatioMonomial {
    std::array<std::vector<int>, 3> powers;  // k (SU), l (AS), m (BU)
    std::vector<int> atag;                   // empty means no A factor

    static RatioMonomial unit() { return {}; }
    static RatioMonomial symbol(Base b, int order);
    static RatioMonomial a_derivative(const std::vector<int>& multi_index);

    void canonicalize();  // drops trailing zeros everywhere
    RatioMonomial operator*(const RatioMonomial& o) const;
    bool operator<(const RatioMonomial& o) const;
    bool operator==(const RatioMonomial& o) const;
    bool is_unit() const;
    // Total weight sum_j j * power over all bases.
    int weight() const;
    std::string to_string() const;
};

using RatioPoly = std::map<RatioMonomial, mpq_class>;
RatioPoly ratio_poly_mul(const RatioPoly& a, const RatioPoly& b);
void ratio_poly_add(RatioPoly& dst, const RatioPoly& src, const mpq_class& scale = 1);

// Dense truncated power series in n variables with per-variable caps and
// RatioPoly coefficients.
class TruncatedSeries {
public:
    explicit TruncatedSeries(std::vector<int> caps);
    static TruncatedSeries one(std::vector<int> caps);

    const std::vector<int>& caps() const { return caps_; }
    std::size_t cell_count() const { return cells_.size(); }
    std::size_t index_of(const std::vector<int>& e) const;
    std::vector<int> exponents_of(std::size_t idx) const;

    RatioPoly& at(const std::vector<int>& e) { return cells_[index_of(e)]; }
    const RatioPoly& at(const std::vector<int>& e) const { return cells_[index_of(e)]; }
    RatioPoly& cell(std::size_t i) { return cells_[i]; }
    const RatioPoly& cell(std::size_t i) const { return cells_[i]; }

    TruncatedSeries operator+(const TruncatedSeries& o) const;
    TruncatedSeries operator*(const TruncatedSeries& o) const;
    // Requires a nonzero rational constant term, else DomainError.
    TruncatedSeries inverse() const;
    TruncatedSeries pow(int e) const;  // e >= 0
    bool operator==(const TruncatedSeries& o) const;

private:
    std::vector<int> caps_;
    std::vector<std::size_t> strides_;
    std::vector<RatioPoly> cells_;
    void check_compatible(const TruncatedSeries& o) const;
};

// (zeta(1+base+sum_{v in shift_vars} v)/zeta(1+base))^{sign*power}, from
// zeta(1+b+v)/zeta(1+b) = sum_m (zeta^(m)/zeta)(1+b) v^m/m!.
TruncatedSeries shifted_zeta_factor(Base base, const std::vector<int>& shift_vars, int sign,
                                    int power, const std::vector<int>& caps);

struct RatioExpansion {
    int d = 0;
    std::vector<int> ell, ellbar;
    int sign = 1;  // (-1)^{sum q l_q + sum q lbar_q}; kept apart from the terms
    bool include_A = false;
    std::map<RatioMonomial, mpq_class> terms;

    // AS <-> BU and ell <-> ellbar; A tags are permuted to the swapped variable order.
    RatioExpansion swapped() const;
    std::string to_text() const;
    std::string to_json() const;  // array of {coeff, su, as, bu, aTag}
};

// Caps of the shift variables: z_{q,i} (cap q) for each q, l_q copies, then the w's.
std::vector<int> shift_caps(const std::vector<int>& ell, const std::vector<int>& ellbar);

// Multi-residue of the normalized integrand, with prod q! cleared so that the
// coefficients are the integer-valued constants Psi. Either side may be empty
// (all zeros), which simply means no shift variables on that side.
RatioExpansion expand_integrand(int d, const std::vector<int>& ell, const std::vector<int>& ellbar,
                                bool include_A, int max_weight = 8);

// sum Psi * prod values^powers. A-tagged terms read a_values; anything
// missing throws DomainError.
std::complex<double> numeric_eval(const RatioExpansion& e,
                                  const std::map<RatioSymbol, std::complex<double>>& values,
                                  const std::map<std::vector<int>, std::complex<double>>& a_values = {});

}  // namespace zmol
