#include "zmol/combinatorics.hpp"

#include <algorithm>
#include <functional>

#include "zmol/numeric.hpp"

namespace zmol {

mpz_class factorial(int n)
{
    if (n < 0)
        throw DomainError("factorial of a negative integer");
    mpz_class r;
    mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
    return r;
}

mpz_class binomial(int n, int k)
{
    if (k < 0 || n < 0 || k > n)
        return 0;
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return r;
}

BellPoly BellPoly::constant(int arity, const mpz_class& c)
{
    BellPoly p;
    p.arity = arity;
    if (c != 0)
        p.terms[std::vector<int>(arity, 0)] = c;
    return p;
}

BellPoly BellPoly::variable(int arity, int i)
{
    if (i < 1 || i > arity)
        throw DomainError("BellPoly::variable index out of range");
    BellPoly p;
    p.arity = arity;
    std::vector<int> e(arity, 0);
    e[i - 1] = 1;
    p.terms[e] = 1;
    return p;
}

BellPoly BellPoly::with_arity(int a) const
{
    BellPoly p;
    p.arity = a;
    for (const auto& [e, c] : terms) {
        std::vector<int> f(a, 0);
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (static_cast<int>(i) < a)
                f[i] = e[i];
            else if (e[i] != 0)
                throw DomainError("BellPoly::with_arity would drop a live variable");
        }
        p.terms[f] += c;
    }
    return p;
}

BellPoly BellPoly::operator+(const BellPoly& o) const
{
    const int a = std::max(arity, o.arity);
    BellPoly r = with_arity(a);
    for (const auto& [e, c] : o.with_arity(a).terms) {
        auto& slot = r.terms[e];
        slot += c;
        if (slot == 0)
            r.terms.erase(e);
    }
    return r;
}

BellPoly BellPoly::operator*(const BellPoly& o) const
{
    const int a = std::max(arity, o.arity);
    const BellPoly x = with_arity(a), y = o.with_arity(a);
    BellPoly r;
    r.arity = a;
    for (const auto& [ea, ca] : x.terms)
        for (const auto& [eb, cb] : y.terms) {
            std::vector<int> e(a);
            for (int i = 0; i < a; ++i)
                e[i] = ea[i] + eb[i];
            r.terms[e] += ca * cb;
        }
    for (auto it = r.terms.begin(); it != r.terms.end();)
        it = (it->second == 0) ? r.terms.erase(it) : std::next(it);
    return r;
}

BellPoly BellPoly::pow(int e) const
{
    BellPoly r = constant(arity, 1);
    for (int i = 0; i < e; ++i)
        r = r * *this;
    return r;
}

bool BellPoly::operator==(const BellPoly& o) const
{
    const int a = std::max(arity, o.arity);
    return with_arity(a).terms == o.with_arity(a).terms;
}

mpz_class BellPoly::eval_ones() const
{
    mpz_class s = 0;
    for (const auto& [e, c] : terms)
        s += c;
    return s;
}

std::string BellPoly::to_string() const
{
    if (terms.empty())
        return "0";
    // highest total degree first, then reverse-lex, reads like the usual listings
    std::vector<std::pair<std::vector<int>, mpz_class>> v(terms.begin(), terms.end());
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::string s;
    for (std::size_t t = 0; t < v.size(); ++t) {
        const auto& [e, c] = v[t];
        mpz_class mag = abs(c);
        if (t == 0)
            s += (c < 0) ? "-" : "";
        else
            s += (c < 0) ? " - " : " + ";
        bool any = false;
        std::string mono;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0)
                continue;
            if (any)
                mono += "*";
            mono += "x" + std::to_string(i + 1);
            if (e[i] > 1)
                mono += "^" + std::to_string(e[i]);
            any = true;
        }
        if (!any)
            s += mag.get_str();
        else if (mag == 1)
            s += mono;
        else
            s += mag.get_str() + "*" + mono;
    }
    return s;
}

std::vector<std::vector<int>> partitions(int k)
{
    if (k < 0)
        throw DomainError("partitions: k must be >= 0");
    std::vector<std::vector<int>> out;
    std::vector<int> v(k, 0);
    // choose multiplicities from the largest part down, emitting in lex order afterwards
    std::function<void(int, int)> rec = [&](int part, int rest) {
        if (part == 0) {
            if (rest == 0)
                out.push_back(v);
            return;
        }
        for (int m = rest / part; m >= 0; --m) {
            v[part - 1] = m;
            rec(part - 1, rest - m * part);
        }
        v[part - 1] = 0;
    };
    rec(k, k);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<int>> compositions(int k, int n)
{
    if (k < 0 || n < 0)
        throw DomainError("compositions: arguments must be >= 0");
    std::vector<std::vector<int>> out;
    if (n == 0) {
        if (k == 0)
            out.emplace_back();
        return out;
    }
    std::vector<int> v(n, 0);
    std::function<void(int, int)> rec = [&](int i, int rest) {
        if (i == n - 1) {
            v[i] = rest;
            out.push_back(v);
            return;
        }
        for (int a = 0; a <= rest; ++a) {
            v[i] = a;
            rec(i + 1, rest - a);
        }
    };
    rec(0, k);
    return out;
}

std::vector<std::vector<int>> strict_compositions(int n, int m)
{
    if (n < 0 || m < 0)
        throw DomainError("strict_compositions: arguments must be >= 0");
    std::vector<std::vector<int>> out;
    if (n < m)
        return out;
    for (auto c : compositions(n - m, m)) {
        for (int& x : c)
            x += 1;
        out.push_back(c);
    }
    return out;
}

mpz_class multinomial(int n, const std::vector<int>& parts)
{
    int s = 0;
    for (int p : parts) {
        if (p < 0)
            throw DomainError("multinomial: negative part");
        s += p;
    }
    if (s != n)
        throw DomainError("multinomial: parts do not sum to n");
    mpz_class r = factorial(n);
    for (int p : parts)
        r /= factorial(p);
    return r;
}

namespace {

const BellPoly& partial_bell_cached(int n, int k, std::map<std::pair<int, int>, BellPoly>& memo)
{
    auto key = std::make_pair(n, k);
    auto it = memo.find(key);
    if (it != memo.end())
        return it->second;
    BellPoly r;
    r.arity = n;
    if (n == 0 && k == 0) {
        r = BellPoly::constant(0, 1);
    } else if (n >= 1 && k >= 1) {
        for (int i = 1; i <= n - k + 1; ++i) {
            const BellPoly& sub = partial_bell_cached(n - i, k - 1, memo);
            if (sub.terms.empty())
                continue;
            BellPoly t = BellPoly::variable(n, i) * sub;
            for (auto& [e, c] : t.terms)
                c *= binomial(n - 1, i - 1);
            r = r + t;
        }
    }
    return memo.emplace(key, r).first->second;
}

}  // namespace

BellPoly partial_bell(int n, int k)
{
    if (n < 0 || k < 0 || k > n)
        throw DomainError("partial_bell: need 0 <= k <= n");
    std::map<std::pair<int, int>, BellPoly> memo;
    BellPoly r = partial_bell_cached(n, k, memo);
    return r.with_arity(n - k + 1 > 0 && n > 0 ? n - k + 1 : 0);
}

BellPoly partial_bell_direct(int n, int k)
{
    if (n < 0 || k < 0 || k > n)
        throw DomainError("partial_bell_direct: need 0 <= k <= n");
    BellPoly r;
    r.arity = (n > 0) ? n - k + 1 : 0;
    for (const auto& v : partitions(n)) {
        int parts = 0;
        for (int m : v)
            parts += m;
        if (parts != k)
            continue;
        // n! / prod (v_i! (i!)^{v_i})
        mpz_class c = factorial(n);
        std::vector<int> e(r.arity, 0);
        for (int i = 1; i <= n; ++i) {
            int m = v[i - 1];
            if (m == 0)
                continue;
            c /= factorial(m);
            for (int j = 0; j < m; ++j)
                c /= factorial(i);
            e[i - 1] = m;
        }
        r.terms[e] += c;
    }
    return r;
}

BellPoly complete_bell(int n)
{
    if (n < 0)
        throw DomainError("complete_bell: n must be >= 0");
    if (n == 0)
        return BellPoly::constant(0, 1);
    BellPoly r;
    r.arity = n;
    for (int k = 1; k <= n; ++k)
        r = r + partial_bell(n, k).with_arity(n);
    return r;
}

BellPoly complete_bell_recursive(int n)
{
    if (n < 0)
        throw DomainError("complete_bell_recursive: n must be >= 0");
    std::vector<BellPoly> B{BellPoly::constant(0, 1)};
    for (int m = 0; m < n; ++m) {
        BellPoly next;
        next.arity = m + 1;
        for (int i = 0; i <= m; ++i) {
            BellPoly t = B[m - i] * BellPoly::variable(m + 1, i + 1);
            for (auto& [e, c] : t.terms)
                c *= binomial(m, i);
            next = next + t;
        }
        B.push_back(next.with_arity(m + 1));
    }
    return B[n];
}

mpz_class bell_number(int n)
{
    return complete_bell(n).eval_ones();
}

BellPoly bell_diagram_poly(int d, int K)
{
    if (d < 1 || K < 0)
        throw DomainError("bell_diagram_poly: need d >= 1 and K >= 0");
    std::vector<BellPoly> Bm;
    for (int m = 1; m <= d; ++m)
        Bm.push_back(complete_bell(m).with_arity(d));
    BellPoly total;
    total.arity = d;
    for (const auto& ks : compositions(K, d)) {
        BellPoly t = BellPoly::constant(d, 1);
        for (int m = 0; m < d; ++m)
            t = t * Bm[m].pow(ks[m]);
        total = total + t;
    }
    return total;
}

mpz_class bell_diagram_count(int d, int K)
{
    if (d < 1 || K < 0)
        throw DomainError("bell_diagram_count: need d >= 1 and K >= 0");
    // B_m(1,..,1) is the Bell number, so no polynomial expansion is needed
    mpz_class total = 0;
    for (const auto& ks : compositions(K, d)) {
        mpz_class t = 1;
        for (int m = 0; m < d; ++m) {
            mpz_class bm = bell_number(m + 1), p;
            mpz_pow_ui(p.get_mpz_t(), bm.get_mpz_t(), static_cast<unsigned long>(ks[m]));
            t *= p;
        }
        total += t;
    }
    return total;
}

std::vector<std::vector<std::vector<int>>> set_partitions(int n)
{
    if (n < 0)
        throw DomainError("set_partitions: n must be >= 0");
    std::vector<std::vector<std::vector<int>>> out;
    std::vector<std::vector<int>> cur;
    std::function<void(int)> rec = [&](int i) {
        if (i == n) {
            out.push_back(cur);
            return;
        }
        for (std::size_t b = 0; b < cur.size(); ++b) {
            cur[b].push_back(i);
            rec(i + 1);
            cur[b].pop_back();
        }
        cur.push_back({i});
        rec(i + 1);
        cur.pop_back();
    };
    rec(0);
    return out;
}

}  // namespace zmol
