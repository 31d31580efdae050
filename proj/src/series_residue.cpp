#include "zmol/series_residue.hpp"

#include <algorithm>
#include <tuple>

#include "json.hpp"

#include "zmol/combinatorics.hpp"
#include "zmol/numeric.hpp"

namespace zmol {

namespace {

void trim(std::vector<int>& v)
{
    while (!v.empty() && v.back() == 0)
        v.pop_back();
}

std::vector<int> add_vec(const std::vector<int>& a, const std::vector<int>& b)
{
    std::vector<int> r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i)
        r[i] += b[i];
    return r;
}

}  // namespace

std::string to_string(Base b)
{
    switch (b) {
    case Base::SU:
        return "SU";
    case Base::AS:
        return "AS";
    case Base::BU:
        return "BU";
    }
    return "?";
}

bool RatioSymbol::operator<(const RatioSymbol& o) const
{
    return std::tie(base, order) < std::tie(o.base, o.order);
}

RatioMonomial RatioMonomial::symbol(Base b, int order)
{
    if (order < 1)
        throw DomainError("RatioMonomial::symbol: order must be >= 1");
    RatioMonomial m;
    m.powers[static_cast<int>(b)].assign(order, 0);
    m.powers[static_cast<int>(b)][order - 1] = 1;
    return m;
}

RatioMonomial RatioMonomial::a_derivative(const std::vector<int>& multi_index)
{
    RatioMonomial m;
    m.atag = multi_index;
    m.canonicalize();
    // A^{(0)} = A itself is still a tag, so keep at least one slot
    if (m.atag.empty())
        m.atag = {0};
    return m;
}

void RatioMonomial::canonicalize()
{
    for (auto& p : powers)
        trim(p);
    if (!atag.empty()) {
        trim(atag);
        if (atag.empty())
            atag = {0};
    }
}

RatioMonomial RatioMonomial::operator*(const RatioMonomial& o) const
{
    if (!atag.empty() && !o.atag.empty())
        throw DomainError("RatioMonomial: product of two A-derivative factors");
    RatioMonomial r;
    for (int b = 0; b < 3; ++b)
        r.powers[b] = add_vec(powers[b], o.powers[b]);
    r.atag = atag.empty() ? o.atag : atag;
    r.canonicalize();
    return r;
}

bool RatioMonomial::operator<(const RatioMonomial& o) const
{
    return std::tie(powers, atag) < std::tie(o.powers, o.atag);
}

bool RatioMonomial::operator==(const RatioMonomial& o) const
{
    return powers == o.powers && atag == o.atag;
}

bool RatioMonomial::is_unit() const
{
    return powers[0].empty() && powers[1].empty() && powers[2].empty() && atag.empty();
}

int RatioMonomial::weight() const
{
    int w = 0;
    for (const auto& p : powers)
        for (std::size_t j = 0; j < p.size(); ++j)
            w += static_cast<int>(j + 1) * p[j];
    return w;
}

std::string RatioMonomial::to_string() const
{
    std::string s;
    for (int b = 0; b < 3; ++b)
        for (std::size_t j = 0; j < powers[b].size(); ++j) {
            if (powers[b][j] == 0)
                continue;
            if (!s.empty())
                s += "*";
            s += zmol::to_string(static_cast<Base>(b)) + std::to_string(j + 1);
            if (powers[b][j] > 1)
                s += "^" + std::to_string(powers[b][j]);
        }
    if (!atag.empty()) {
        if (!s.empty())
            s += "*";
        s += "A[";
        for (std::size_t i = 0; i < atag.size(); ++i)
            s += (i ? "," : "") + std::to_string(atag[i]);
        s += "]";
    }
    return s.empty() ? "1" : s;
}

RatioPoly ratio_poly_mul(const RatioPoly& a, const RatioPoly& b)
{
    RatioPoly r;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) {
            auto& slot = r[ma * mb];
            slot += ca * cb;
        }
    for (auto it = r.begin(); it != r.end();)
        it = (it->second == 0) ? r.erase(it) : std::next(it);
    return r;
}

void ratio_poly_add(RatioPoly& dst, const RatioPoly& src, const mpq_class& scale)
{
    for (const auto& [m, c] : src) {
        auto it = dst.find(m);
        if (it == dst.end()) {
            mpq_class v = c * scale;
            if (v != 0)
                dst.emplace(m, v);
        } else {
            it->second += c * scale;
            if (it->second == 0)
                dst.erase(it);
        }
    }
}

// ---- TruncatedSeries ----

TruncatedSeries::TruncatedSeries(std::vector<int> caps) : caps_(std::move(caps))
{
    std::size_t n = 1;
    strides_.resize(caps_.size());
    for (std::size_t i = caps_.size(); i-- > 0;) {
        if (caps_[i] < 0)
            throw DomainError("TruncatedSeries: negative cap");
        strides_[i] = n;
        n *= static_cast<std::size_t>(caps_[i] + 1);
    }
    cells_.resize(n);
}

TruncatedSeries TruncatedSeries::one(std::vector<int> caps)
{
    TruncatedSeries s(std::move(caps));
    s.cells_[0][RatioMonomial::unit()] = 1;
    return s;
}

std::size_t TruncatedSeries::index_of(const std::vector<int>& e) const
{
    if (e.size() != caps_.size())
        throw DomainError("TruncatedSeries: exponent arity mismatch");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] < 0 || e[i] > caps_[i])
            throw DomainError("TruncatedSeries: exponent beyond cap");
        idx += strides_[i] * static_cast<std::size_t>(e[i]);
    }
    return idx;
}

std::vector<int> TruncatedSeries::exponents_of(std::size_t idx) const
{
    std::vector<int> e(caps_.size());
    for (std::size_t i = 0; i < caps_.size(); ++i) {
        e[i] = static_cast<int>(idx / strides_[i]);
        idx %= strides_[i];
    }
    return e;
}

void TruncatedSeries::check_compatible(const TruncatedSeries& o) const
{
    if (caps_ != o.caps_)
        throw DomainError("TruncatedSeries: cap mismatch");
}

TruncatedSeries TruncatedSeries::operator+(const TruncatedSeries& o) const
{
    check_compatible(o);
    TruncatedSeries r = *this;
    for (std::size_t i = 0; i < cells_.size(); ++i)
        ratio_poly_add(r.cells_[i], o.cells_[i]);
    return r;
}

TruncatedSeries TruncatedSeries::operator*(const TruncatedSeries& o) const
{
    check_compatible(o);
    TruncatedSeries r(caps_);
    const std::size_t n = cells_.size();
    std::vector<std::vector<int>> ex(n);
    for (std::size_t i = 0; i < n; ++i)
        ex[i] = exponents_of(i);
    for (std::size_t a = 0; a < n; ++a) {
        if (cells_[a].empty())
            continue;
        for (std::size_t b = 0; b < n; ++b) {
            if (o.cells_[b].empty())
                continue;
            bool fits = true;
            for (std::size_t v = 0; v < caps_.size() && fits; ++v)
                fits = ex[a][v] + ex[b][v] <= caps_[v];
            if (!fits)
                continue;
            // within caps the mixed-radix index is additive
            ratio_poly_add(r.cells_[a + b], ratio_poly_mul(cells_[a], o.cells_[b]));
        }
    }
    return r;
}

TruncatedSeries TruncatedSeries::inverse() const
{
    const RatioPoly& c0 = cells_[0];
    if (c0.size() != 1 || !c0.begin()->first.is_unit())
        throw DomainError("TruncatedSeries::inverse: constant term is not an invertible rational");
    const mpq_class a0 = c0.begin()->second;
    // 1/S = (1/a0) sum_k (1 - S/a0)^k, nilpotent beyond the total cap
    TruncatedSeries D(caps_);
    for (std::size_t i = 1; i < cells_.size(); ++i)
        ratio_poly_add(D.cells_[i], cells_[i], mpq_class(-1) / a0);
    TruncatedSeries res = one(caps_), term = one(caps_);
    int total = 0;
    for (int c : caps_)
        total += c;
    for (int k = 1; k <= total; ++k) {
        term = term * D;
        res = res + term;
    }
    for (auto& cell : res.cells_)
        for (auto& [m, c] : cell)
            c /= a0;
    return res;
}

TruncatedSeries TruncatedSeries::pow(int e) const
{
    if (e < 0)
        throw DomainError("TruncatedSeries::pow: negative exponent");
    TruncatedSeries r = one(caps_), base = *this;
    while (e > 0) {
        if (e & 1)
            r = r * base;
        e >>= 1;
        if (e)
            base = base * base;
    }
    return r;
}

bool TruncatedSeries::operator==(const TruncatedSeries& o) const
{
    return caps_ == o.caps_ && cells_ == o.cells_;
}

TruncatedSeries shifted_zeta_factor(Base base, const std::vector<int>& shift_vars, int sign,
                                    int power, const std::vector<int>& caps)
{
    if (power < 1)
        throw DomainError("shifted_zeta_factor: power must be >= 1");
    if (sign != 1 && sign != -1)
        throw DomainError("shifted_zeta_factor: sign must be +1 or -1");
    TruncatedSeries s(caps);
    for (int v : shift_vars)
        if (v < 0 || v >= static_cast<int>(caps.size()))
            throw DomainError("shifted_zeta_factor: shift variable out of range");
    // (sum v)^m / m! = sum_{|e|=m} prod v_i^{e_i}/e_i!
    for (std::size_t idx = 0; idx < s.cell_count(); ++idx) {
        const std::vector<int> e = s.exponents_of(idx);
        int m = 0;
        bool ok = true;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0)
                continue;
            if (std::find(shift_vars.begin(), shift_vars.end(), static_cast<int>(i)) == shift_vars.end())
                ok = false;
            m += e[i];
        }
        if (!ok)
            continue;
        mpq_class coef = 1;
        for (int x : e)
            coef /= mpq_class(factorial(x));
        const RatioMonomial mono = (m == 0) ? RatioMonomial::unit() : RatioMonomial::symbol(base, m);
        s.cell(idx)[mono] += coef;
    }
    if (sign == -1)
        s = s.inverse();
    return s.pow(power);
}

// ---- expansion ----

std::vector<int> shift_caps(const std::vector<int>& ell, const std::vector<int>& ellbar)
{
    std::vector<int> caps;
    for (const auto* side : {&ell, &ellbar})
        for (std::size_t q = 0; q < side->size(); ++q)
            for (int i = 0; i < (*side)[q]; ++i)
                caps.push_back(static_cast<int>(q + 1));
    return caps;
}

RatioExpansion expand_integrand(int d, const std::vector<int>& ell, const std::vector<int>& ellbar,
                                bool include_A, int max_weight)
{
    if (d < 1)
        throw DomainError("expand_integrand: d must be >= 1");
    if (static_cast<int>(ell.size()) != d || static_cast<int>(ellbar.size()) != d)
        throw DomainError("expand_integrand: exponent vectors must have length d");
    int L = 0, Lb = 0, weight = 0;
    for (int q = 1; q <= d; ++q) {
        if (ell[q - 1] < 0 || ellbar[q - 1] < 0)
            throw DomainError("expand_integrand: negative exponent");
        L += ell[q - 1];
        Lb += ellbar[q - 1];
        weight += q * (ell[q - 1] + ellbar[q - 1]);
    }
    const std::vector<int> caps = shift_caps(ell, ellbar);
    if (weight > max_weight) {
        double cells = 1.0;
        for (int c : caps)
            cells *= c + 1;
        throw ResourceError("expand_integrand: weight " + std::to_string(weight) + " exceeds " +
                            std::to_string(max_weight) + "; about " + fmt_double(cells) +
                            " series cells and Bell-sized coefficient polynomials per cell");
    }

    const int nv = static_cast<int>(caps.size());
    TruncatedSeries tot = TruncatedSeries::one(caps);
    for (int i = 0; i < L; ++i)
        for (int j = L; j < nv; ++j)
            tot = tot * shifted_zeta_factor(Base::SU, {i, j}, 1, 1, caps);
    for (int i = 0; i < L; ++i) {
        tot = tot * shifted_zeta_factor(Base::AS, {i}, 1, 1, caps);
        tot = tot * shifted_zeta_factor(Base::SU, {i}, -1, Lb + 1, caps);
    }
    for (int j = L; j < nv; ++j) {
        tot = tot * shifted_zeta_factor(Base::BU, {j}, 1, 1, caps);
        tot = tot * shifted_zeta_factor(Base::SU, {j}, -1, L + 1, caps);
    }
    if (include_A) {
        TruncatedSeries a(caps);
        for (std::size_t idx = 0; idx < a.cell_count(); ++idx) {
            const std::vector<int> e = a.exponents_of(idx);
            mpq_class coef = 1;
            for (int x : e)
                coef /= mpq_class(factorial(x));
            a.cell(idx)[RatioMonomial::a_derivative(e)] = coef;
        }
        tot = tot * a;
    }

    RatioExpansion out;
    out.d = d;
    out.ell = ell;
    out.ellbar = ellbar;
    out.sign = (weight % 2 == 0) ? 1 : -1;
    out.include_A = include_A;
    mpz_class scale = 1;
    for (int c : caps)
        scale *= factorial(c);
    for (const auto& [m, c] : tot.at(caps)) {
        mpq_class v = c * mpq_class(scale);
        v.canonicalize();
        out.terms.emplace(m, v);
    }
    return out;
}

RatioExpansion RatioExpansion::swapped() const
{
    RatioExpansion r;
    r.d = d;
    r.ell = ellbar;
    r.ellbar = ell;
    r.sign = sign;
    r.include_A = include_A;
    int L = 0;
    for (int x : ell)
        L += x;
    const int nv = static_cast<int>(shift_caps(ell, ellbar).size());
    for (const auto& [m, c] : terms) {
        RatioMonomial s = m;
        std::swap(s.powers[1], s.powers[2]);
        if (!m.atag.empty()) {
            std::vector<int> full(nv, 0);
            for (std::size_t i = 0; i < m.atag.size() && static_cast<int>(i) < nv; ++i)
                full[i] = m.atag[i];
            std::vector<int> t(full.begin() + L, full.end());
            t.insert(t.end(), full.begin(), full.begin() + L);
            s.atag = t;
        }
        s.canonicalize();
        r.terms.emplace(s, c);
    }
    return r;
}

std::string RatioExpansion::to_text() const
{
    std::string s;
    for (const auto& [m, c] : terms) {
        const std::string cs = c.get_str();
        s += (c < 0 ? "" : "+") + cs + " " + m.to_string() + "\n";
    }
    return s;
}

std::string RatioExpansion::to_json() const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [m, c] : terms) {
        nlohmann::json t;
        t["coeff"] = c.get_str();
        t["su"] = m.powers[0];
        t["as"] = m.powers[1];
        t["bu"] = m.powers[2];
        t["aTag"] = m.atag;
        arr.push_back(t);
    }
    return arr.dump();
}

std::complex<double> numeric_eval(const RatioExpansion& e,
                                  const std::map<RatioSymbol, std::complex<double>>& values,
                                  const std::map<std::vector<int>, std::complex<double>>& a_values)
{
    std::complex<double> total = 0.0;
    for (const auto& [m, c] : e.terms) {
        std::complex<double> t = c.get_d();
        for (int b = 0; b < 3; ++b)
            for (std::size_t j = 0; j < m.powers[b].size(); ++j) {
                if (m.powers[b][j] == 0)
                    continue;
                auto it = values.find(RatioSymbol{static_cast<Base>(b), static_cast<int>(j + 1)});
                if (it == values.end())
                    throw DomainError("numeric_eval: no value for " +
                                      to_string(static_cast<Base>(b)) + std::to_string(j + 1));
                t *= std::pow(it->second, m.powers[b][j]);
            }
        if (!m.atag.empty()) {
            auto it = a_values.find(m.atag);
            if (it == a_values.end())
                throw DomainError("numeric_eval: no value for A-derivative " + m.to_string());
            t *= it->second;
        }
        total += t;
    }
    return total;
}

}  // namespace zmol
