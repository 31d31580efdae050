#include "zmol/mollifier.hpp"

#include <algorithm>
#include <cmath>

#include "zmol/combinatorics.hpp"

namespace zmol {

Poly PolySpec::monomial() const
{
    switch (basis) {
    case PolyBasis::Monomial:
        return Poly(params.empty() ? std::vector<double>{0.0} : params);
    case PolyBasis::XOneMinusX:
        return poly_x_one_minus_x(params);
    case PolyBasis::OddPowers:
        return poly_odd_basis(params);
    }
    return Poly({0.0});
}

void PolySpec::validate(double tol) const
{
    const Poly p = monomial();
    switch (constraint) {
    case PolyConstraint::Free:
        return;
    case PolyConstraint::P0:
        if (std::fabs(p(1.0) - 1.0) > tol)
            throw ConfigError("polynomial violates P(1) = 1");
        [[fallthrough]];
    case PolyConstraint::Pk:
        if (std::fabs(p(0.0)) > tol)
            throw ConfigError("polynomial violates P(0) = 0");
        return;
    case PolyConstraint::Q: {
        if (std::fabs(p(0.0) - 1.0) > tol)
            throw ConfigError("polynomial violates Q(0) = 1");
        // Q'(x) - Q'(1-x) must vanish identically; test it at a few points
        const Poly dp = p.derivative();
        for (double x : {0.0, 0.13, 0.37, 0.5, 0.71, 1.0})
            if (std::fabs(dp(x) - dp(1.0 - x)) > tol)
                throw ConfigError("polynomial violates Q'(x) = Q'(1-x)");
        return;
    }
    }
}

void PolySpec::normalize()
{
    if (basis == PolyBasis::OddPowers && constraint == PolyConstraint::Q && !params.empty()) {
        double s = 0.0;
        for (std::size_t j = 1; j < params.size(); ++j)
            s += params[j];
        params[0] = 1.0 - s;
    }
    if (basis == PolyBasis::Monomial &&
        (constraint == PolyConstraint::Pk || constraint == PolyConstraint::P0) && !params.empty())
        params[0] = 0.0;
    if (basis == PolyBasis::Monomial && constraint == PolyConstraint::P0 && params.size() >= 2) {
        double s = 0.0;
        for (std::size_t j = 2; j < params.size(); ++j)
            s += params[j];
        params[1] = 1.0 - s;
    }
}

std::vector<bool> PolySpec::fixed_mask() const
{
    std::vector<bool> m(params.size(), false);
    if (params.empty())
        return m;
    if (basis == PolyBasis::OddPowers && constraint == PolyConstraint::Q)
        m[0] = true;
    if (basis == PolyBasis::Monomial && (constraint == PolyConstraint::Pk || constraint == PolyConstraint::P0))
        m[0] = true;
    if (basis == PolyBasis::Monomial && constraint == PolyConstraint::P0 && params.size() >= 2)
        m[1] = true;
    return m;
}

std::string to_string(PolyBasis b)
{
    switch (b) {
    case PolyBasis::Monomial:
        return "monomial";
    case PolyBasis::XOneMinusX:
        return "x1mx";
    case PolyBasis::OddPowers:
        return "odd";
    }
    return "?";
}

std::string to_string(PolyConstraint c)
{
    switch (c) {
    case PolyConstraint::P0:
        return "P0";
    case PolyConstraint::Pk:
        return "Pk";
    case PolyConstraint::Q:
        return "Q";
    case PolyConstraint::Free:
        return "free";
    }
    return "?";
}

PolyBasis basis_from_string(const std::string& s)
{
    if (s == "monomial")
        return PolyBasis::Monomial;
    if (s == "x1mx")
        return PolyBasis::XOneMinusX;
    if (s == "odd")
        return PolyBasis::OddPowers;
    throw ConfigError("unknown polynomial basis '" + s + "'");
}

PolyConstraint constraint_from_string(const std::string& s)
{
    if (s == "P0")
        return PolyConstraint::P0;
    if (s == "Pk")
        return PolyConstraint::Pk;
    if (s == "Q")
        return PolyConstraint::Q;
    if (s == "free")
        return PolyConstraint::Free;
    throw ConfigError("unknown polynomial constraint '" + s + "'");
}

void MollifierSpec::validate() const
{
    if (d < 0)
        throw ConfigError("mollifier: d must be >= 0");
    if (K < 0)
        throw ConfigError("mollifier: K must be >= 0");
    if (!(theta > 0.0 && theta < 1.0))
        throw ConfigError("mollifier: theta must lie in (0,1)");
    for (const auto& [ell, p] : polynomials) {
        if (static_cast<int>(ell.size()) != d)
            throw ConfigError("mollifier: polynomial key has wrong length");
        p.validate();
    }
}

std::vector<MollifierPiece> mollifier_coeff_tables(const MollifierSpec& spec, std::size_t n_max)
{
    spec.validate();
    std::vector<MollifierPiece> out;
    for (int total = 0; total <= (spec.d == 0 ? 0 : spec.K); ++total) {
        for (const auto& ell : compositions(total, spec.d)) {
            MollifierPiece piece;
            piece.ell = ell;
            ConvolutionSpec cs{spec.d, ell, spec.squarefree_restricted};
            piece.table = convolution_table(cs, n_max);
            int weighted = 0;
            for (int r = 1; r <= spec.d; ++r)
                weighted += r * ell[r - 1];
            piece.sign = ((total + weighted) % 2 == 0) ? 1 : -1;
            piece.multinomial = multinomial(total, ell);
            piece.log_power = weighted;
            out.push_back(std::move(piece));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const MollifierPiece& a, const MollifierPiece& b) { return a.ell < b.ell; });
    return out;
}

FnTable feng_coeffs(int K, std::size_t n_max, const std::map<int, PolySpec>& polys, double N)
{
    if (K < 2)
        throw DomainError("feng_coeffs: K must be >= 2");
    if (!(N > 1.0))
        throw DomainError("feng_coeffs: N must exceed 1");
    const double logN = std::log(N);
    const FnTable musq = mobius_sq_sieve(n_max);
    FnTable out;
    out.n_max = n_max;
    out.values.assign(n_max, 0.0);
    out.label = "b_F";
    for (int k = 2; k <= K; ++k) {
        auto it = polys.find(k);
        if (it == polys.end())
            continue;
        const Poly P = it->second.monomial();
        // on squarefree n, mu(n) S_k(n) = (-1)^k (mu * Lambda^{*k})(n)
        const FnTable conv = convolution_table(ConvolutionSpec{1, {k}, false}, n_max);
        const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t n = 1; n <= n_max; ++n) {
            if (musq[n] == 0.0 || static_cast<double>(n) > N)
                continue;
            const double arg = std::log(N / static_cast<double>(n)) / logN;
            out[n] += sgn * conv[n] / std::pow(logN, k) * P(arg);
        }
    }
    return out;
}

std::vector<PartialSumRow> partial_sum_compare(const ConvolutionSpec& spec, std::size_t x_max)
{
    if (x_max < 1)
        throw DomainError("partial_sum_compare: x_max must be >= 1");
    ConvolutionSpec base = spec;
    base.squarefree_restricted = false;
    const FnTable all = convolution_table(base, x_max);
    const FnTable musq = mobius_sq_sieve(x_max);
    std::vector<PartialSumRow> rows;
    rows.reserve(x_max);
    KahanSum su, sr;
    for (std::size_t x = 1; x <= x_max; ++x) {
        su.add(all[x]);
        sr.add(all[x] * musq[x]);
        const double u = static_cast<double>(su.value());
        const double r = static_cast<double>(sr.value());
        rows.push_back({x, u, r, static_cast<double>(su.value() - sr.value())});
    }
    return rows;
}

}  // namespace zmol
