#include "zmol/numeric.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace zmol {

double Poly::operator()(double x) const
{
    double r = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        r = r * x + *it;
    return r;
}

Poly Poly::derivative() const
{
    if (c.size() <= 1)
        return Poly({0.0});
    std::vector<double> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i)
        d[i - 1] = c[i] * static_cast<double>(i);
    return Poly(d);
}

int Poly::degree() const
{
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
        if (c[i] != 0.0)
            return i;
    return -1;
}

Poly Poly::operator+(const Poly& o) const
{
    std::vector<double> r(std::max(c.size(), o.c.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i)
        r[i] += c[i];
    for (std::size_t i = 0; i < o.c.size(); ++i)
        r[i] += o.c[i];
    return Poly(r);
}

Poly Poly::operator*(const Poly& o) const
{
    if (c.empty() || o.c.empty())
        return Poly({0.0});
    std::vector<double> r(c.size() + o.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < o.c.size(); ++j)
            r[i + j] += c[i] * o.c[j];
    return Poly(r);
}

Poly Poly::scaled(double s) const
{
    Poly r = *this;
    for (auto& v : r.c)
        v *= s;
    return r;
}

Poly Poly::pow(int e) const
{
    Poly r({1.0});
    for (int i = 0; i < e; ++i)
        r = r * *this;
    return r;
}

Poly poly_x_one_minus_x(const std::vector<double>& c)
{
    const Poly x({0.0, 1.0});
    const Poly omx({1.0, -1.0});
    Poly p = x;
    for (std::size_t j = 0; j < c.size(); ++j)
        p = p + (x * omx.pow(static_cast<int>(j) + 1)).scaled(c[j]);
    return p;
}

Poly poly_odd_basis(const std::vector<double>& c)
{
    if (c.empty())
        return Poly({0.0});
    const Poly t({1.0, -2.0});
    Poly p({c[0]});
    for (std::size_t j = 1; j < c.size(); ++j)
        p = p + t.pow(2 * static_cast<int>(j) - 1).scaled(c[j]);
    return p;
}

namespace {

QuadRule make_rule(int n)
{
    // Newton on P_n from the Chebyshev-like initial guess, standard recipe.
    QuadRule r;
    r.x.resize(n);
    r.w.resize(n);
    const long double pi = 3.141592653589793238462643383279502884L;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        long double z = std::cos(pi * (i + 0.75L) / (n + 0.5L));
        long double pp = 0.0L;
        for (int it = 0; it < 100; ++it) {
            long double p1 = 1.0L, p2 = 0.0L;
            for (int j = 1; j <= n; ++j) {
                long double p3 = p2;
                p2 = p1;
                p1 = ((2.0L * j - 1.0L) * z * p2 - (j - 1.0L) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0L);
            long double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) < 1e-19L)
                break;
        }
        long double w = 2.0L / ((1.0L - z * z) * pp * pp);
        // map [-1,1] -> [0,1]
        r.x[i] = static_cast<double>((1.0L - z) / 2.0L);
        r.x[n - 1 - i] = static_cast<double>((1.0L + z) / 2.0L);
        r.w[i] = r.w[n - 1 - i] = static_cast<double>(w / 2.0L);
    }
    return r;
}

}  // namespace

const QuadRule& gauss_legendre(int n)
{
    if (n < 1)
        throw DomainError("quadrature order must be positive");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<QuadRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot)
        slot = std::make_unique<QuadRule>(make_rule(n));
    return *slot;
}

double integrate_to_infinity(const std::function<double(double)>& f, double a)
{
    // t = a e^y; panels [0,1],[1,2],[2,4],...,[64,128] in y.
    const QuadRule& g = gauss_legendre(32);
    KahanSum acc;
    double lo = 0.0, hi = 1.0;
    for (int panel = 0; panel < 9; ++panel) {
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            double y = lo + (hi - lo) * g.x[i];
            double t = a * std::exp(y);
            acc.add(static_cast<long double>(g.w[i] * (hi - lo) * f(t) * t));
        }
        lo = hi;
        hi *= 2.0;
    }
    return static_cast<double>(acc.value());
}

void KahanSum::add(long double v)
{
    long double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
        comp_ += (sum_ - t) + v;
    else
        comp_ += (v - t) + sum_;
    sum_ = t;
}

std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_long_double(long double v)
{
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.21Lg", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<int> parse_int_list(const std::string& s)
{
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        std::size_t pos = 0;
        int v = std::stoi(item, &pos);
        if (pos != item.size())
            throw DomainError("bad integer list item '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        std::size_t pos = 0;
        double v = std::stod(item, &pos);
        if (pos != item.size())
            throw DomainError("bad number list item '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace zmol
