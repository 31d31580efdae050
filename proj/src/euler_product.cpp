#include "zmol/euler_product.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "zmol/arith_sieve.hpp"
#include "zmol/combinatorics.hpp"
#include "zmol/numeric.hpp"

namespace zmol {

namespace {

constexpr std::size_t kBlock = 1u << 16;

// Keeps the largest prime table built so far; smaller cutoffs reuse a prefix.
std::shared_ptr<const PrimeTable> primes_up_to(std::uint64_t cutoff)
{
    static std::mutex mu;
    static std::shared_ptr<const PrimeTable> cache;
    std::lock_guard<std::mutex> lock(mu);
    if (!cache || cache->limit < cutoff)
        cache = std::make_shared<const PrimeTable>(sieve_primes(cutoff));
    return cache;
}

}  // namespace

PrimeSumResult prime_sum(const std::function<long double(long double)>& f, std::uint64_t cutoff,
                         int threads, bool with_tail)
{
    if (cutoff < 2)
        throw DomainError("prime_sum: cutoff must be >= 2");
    const auto table = primes_up_to(cutoff);
    const auto& pr = table->primes;
    const std::size_t count =
        static_cast<std::size_t>(std::upper_bound(pr.begin(), pr.end(), cutoff) - pr.begin());
    const std::size_t nblocks = (count + kBlock - 1) / kBlock;
    std::vector<long double> block_sums(nblocks, 0.0L);
    std::vector<std::exception_ptr> errors(std::max(threads, 1));

    auto worker = [&](int tid, int nt) {
        try {
            for (std::size_t b = static_cast<std::size_t>(tid); b < nblocks; b += static_cast<std::size_t>(nt)) {
                KahanSum acc;
                const std::size_t hi = std::min(count, (b + 1) * kBlock);
                for (std::size_t i = b * kBlock; i < hi; ++i)
                    acc.add(f(static_cast<long double>(pr[i])));
                block_sums[b] = acc.value();
            }
        } catch (...) {
            errors[tid] = std::current_exception();
        }
    };
    const int nt = std::max(1, threads);
    if (nt == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t)
            pool.emplace_back(worker, t, nt);
        for (auto& th : pool)
            th.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    KahanSum total;
    for (long double v : block_sums)
        total.add(v);
    PrimeSumResult r;
    r.cutoff = cutoff;
    r.value = total.value();
    if (with_tail) {
        const double tail = integrate_to_infinity(
            [&](double t) { return static_cast<double>(f(t) / std::log(static_cast<long double>(t))); },
            static_cast<double>(cutoff));
        r.value += tail;
        r.tail_estimate = std::fabs(tail);
    }
    return r;
}

long double log_A_prime_term(long double t, const LogAPoint& pt)
{
    const long double L = static_cast<long double>(pt.z.size());
    const long double Lb = static_cast<long double>(pt.w.size());
    const long double lt = std::log(t);
    auto check = [](long double e) {
        if (!(e > 0.5L))
            throw DomainError("log A: shifted exponent " + fmt_long_double(e) +
                              " is outside the convergence region (> 1/2)");
    };
    // y(e) = t^{-e}; log(1 - y) through log1p keeps the diagonal cancellation clean
    auto y = [&](long double e) {
        check(e);
        return std::exp(-e * lt);
    };
    auto l1m = [&](long double e) { return std::log1p(-y(e)); };

    const long double su = 1.0L + pt.s + pt.u;
    const long double as = 1.0L + pt.alpha + pt.s;
    const long double bu = 1.0L + pt.beta + pt.u;

    long double v = (L + 1) * (Lb + 1) * l1m(su) - (L + 1) * l1m(as) - (Lb + 1) * l1m(bu);
    long double br = -(L + 1) * y(as) - (Lb + 1) * y(bu) + (L + 1) * (Lb + 1) * y(su);
    for (double zi : pt.z)
        for (double wj : pt.w) {
            v += l1m(su + zi + wj);
            br += y(su + zi + wj);
        }
    for (double zi : pt.z) {
        v += l1m(as + zi) - (Lb + 1) * l1m(su + zi);
        br += y(as + zi) - (Lb + 1) * y(su + zi);
    }
    for (double wj : pt.w) {
        v += l1m(bu + wj) - (L + 1) * l1m(su + wj);
        br += y(bu + wj) - (L + 1) * y(su + wj);
    }
    // br holds the bracket minus 1
    if (!(br > -1.0L))
        throw DomainError("log A: nonpositive local factor");
    return v + std::log1p(br);
}

PrimeSumResult log_A_numeric(const LogAPoint& pt, std::uint64_t cutoff, int threads)
{
    if (cutoff < 100)
        throw DomainError("log_A_numeric: prime cutoff must be >= 100");
    log_A_prime_term(2.0L, pt);  // surface divergence errors before threading
    return prime_sum([&](long double t) { return log_A_prime_term(t, pt); }, cutoff, threads);
}

// ---- catalog ----

std::string to_string(DerivFamily f)
{
    switch (f) {
    case DerivFamily::D1L1:
        return "d1l1";
    case DerivFamily::D1L2:
        return "d1l2";
    case DerivFamily::D2L11:
        return "d2l11";
    }
    return "?";
}

std::string to_string(DerivLevel l)
{
    return l == DerivLevel::A ? "A" : "logA";
}

std::string to_string(ClosedForm c)
{
    switch (c) {
    case ClosedForm::Zero:
        return "0";
    case ClosedForm::NegS2:
        return "-S2";
    case ClosedForm::TwoS2Squared:
        return "2*S2^2";
    case ClosedForm::D2Mixed11:
        return "sum(lg^2/X - X lg^2/(X-1)^2)";
    case ClosedForm::D2Mixed12:
        return "sum(X(1+X) lg^3/(X-1)^3 - lg^3/X)";
    case ClosedForm::D2Mixed22:
        return "sum(lg^4/X - X(1+X(4+X)) lg^4/(X-1)^4)";
    }
    return "?";
}

DerivFamily family_from_string(const std::string& s)
{
    if (s == "d1l1")
        return DerivFamily::D1L1;
    if (s == "d1l2")
        return DerivFamily::D1L2;
    if (s == "d2l11")
        return DerivFamily::D2L11;
    throw DomainError("unknown derivative family '" + s + "' (d1l1, d1l2, d2l11)");
}

DerivLevel level_from_string(const std::string& s)
{
    if (s == "A")
        return DerivLevel::A;
    if (s == "logA")
        return DerivLevel::LogA;
    throw DomainError("unknown derivative level '" + s + "' (A, logA)");
}

int family_z_count(DerivFamily f)
{
    return f == DerivFamily::D1L1 ? 1 : 2;
}

int family_w_count(DerivFamily f)
{
    return f == DerivFamily::D1L1 ? 1 : 2;
}

const std::vector<CatalogEntry>& derivative_catalog()
{
    using F = DerivFamily;
    using L = DerivLevel;
    using C = ClosedForm;
    static const std::vector<CatalogEntry> cat = {
        // one z, one w
        {F::D1L1, L::LogA, {1, 0}, C::Zero},
        {F::D1L1, L::LogA, {0, 1}, C::Zero},
        {F::D1L1, L::LogA, {1, 1}, C::NegS2},
        {F::D1L1, L::A, {1, 0}, C::Zero},
        {F::D1L1, L::A, {0, 1}, C::Zero},
        {F::D1L1, L::A, {1, 1}, C::NegS2},
        // two z, two w; log A
        {F::D1L2, L::LogA, {1, 0, 0, 0}, C::Zero},
        {F::D1L2, L::LogA, {0, 1, 0, 0}, C::Zero},
        {F::D1L2, L::LogA, {0, 0, 1, 0}, C::Zero},
        {F::D1L2, L::LogA, {0, 0, 0, 1}, C::Zero},
        {F::D1L2, L::LogA, {1, 1, 0, 0}, C::Zero},
        {F::D1L2, L::LogA, {0, 0, 1, 1}, C::Zero},
        {F::D1L2, L::LogA, {1, 0, 1, 0}, C::NegS2},
        {F::D1L2, L::LogA, {0, 1, 0, 1}, C::NegS2},
        {F::D1L2, L::LogA, {0, 1, 1, 0}, C::NegS2},
        {F::D1L2, L::LogA, {1, 0, 0, 1}, C::NegS2},
        {F::D1L2, L::LogA, {1, 1, 1, 0}, C::Zero},
        {F::D1L2, L::LogA, {1, 1, 0, 1}, C::Zero},
        {F::D1L2, L::LogA, {1, 0, 1, 1}, C::Zero},
        {F::D1L2, L::LogA, {1, 1, 1, 1}, C::Zero},
        // two z, two w; A itself
        {F::D1L2, L::A, {1, 0, 0, 0}, C::Zero},
        {F::D1L2, L::A, {0, 1, 0, 0}, C::Zero},
        {F::D1L2, L::A, {0, 0, 1, 0}, C::Zero},
        {F::D1L2, L::A, {0, 0, 0, 1}, C::Zero},
        {F::D1L2, L::A, {1, 1, 0, 0}, C::Zero},
        {F::D1L2, L::A, {0, 0, 1, 1}, C::Zero},
        {F::D1L2, L::A, {1, 0, 1, 0}, C::NegS2},
        {F::D1L2, L::A, {1, 0, 0, 1}, C::NegS2},
        {F::D1L2, L::A, {0, 1, 0, 1}, C::NegS2},
        {F::D1L2, L::A, {0, 1, 1, 0}, C::NegS2},
        {F::D1L2, L::A, {1, 1, 1, 0}, C::Zero},
        {F::D1L2, L::A, {1, 1, 0, 1}, C::Zero},
        {F::D1L2, L::A, {1, 0, 1, 1}, C::Zero},
        {F::D1L2, L::A, {0, 1, 1, 1}, C::Zero},
        {F::D1L2, L::A, {1, 1, 1, 1}, C::TwoS2Squared},
        // degree two, z_{1,1}, z_{2,1}, w_{1,1}, w_{2,1}; log A
        {F::D2L11, L::LogA, {1, 0, 0, 0}, C::Zero},
        {F::D2L11, L::LogA, {0, 2, 0, 0}, C::Zero},
        {F::D2L11, L::LogA, {1, 2, 0, 0}, C::Zero},
        {F::D2L11, L::LogA, {1, 0, 1, 0}, C::D2Mixed11},
        {F::D2L11, L::LogA, {1, 0, 0, 2}, C::D2Mixed12},
        {F::D2L11, L::LogA, {0, 2, 0, 2}, C::D2Mixed22},
        {F::D2L11, L::LogA, {1, 2, 1, 0}, C::Zero},
        {F::D2L11, L::LogA, {1, 2, 1, 1}, C::Zero},
        {F::D2L11, L::LogA, {1, 2, 1, 2}, C::Zero},
    };
    return cat;
}

const CatalogEntry* find_catalog_entry(DerivFamily f, DerivLevel l, const std::vector<int>& orders)
{
    for (const auto& e : derivative_catalog())
        if (e.family == f && e.level == l && e.orders == orders)
            return &e;
    return nullptr;
}

PrimeSumResult a_derivative_closed_form(DerivFamily f, DerivLevel l, const std::vector<int>& orders,
                                        double x, std::uint64_t cutoff, int threads)
{
    const CatalogEntry* e = find_catalog_entry(f, l, orders);
    if (!e) {
        std::string idx;
        for (int o : orders)
            idx += (idx.empty() ? "" : ",") + std::to_string(o);
        throw DomainError("unsupported derivative index (" + idx + ") for " + to_string(f) + "/" +
                          to_string(l));
    }
    if (!(1.0 + x > 0.5))
        throw DomainError("a_derivative_closed_form: 1 + x must exceed 1/2");
    const long double e1 = 1.0L + x;
    auto S2 = [&] {
        return prime_sum(
            [e1](long double t) {
                const long double lg = std::log(t);
                const long double r = lg / std::expm1(e1 * lg);
                return r * r;
            },
            cutoff, threads);
    };
    PrimeSumResult r;
    r.cutoff = cutoff;
    switch (e->form) {
    case ClosedForm::Zero:
        return r;
    case ClosedForm::NegS2: {
        r = S2();
        r.value = -r.value;
        return r;
    }
    case ClosedForm::TwoS2Squared: {
        const PrimeSumResult s = S2();
        r.value = 2.0L * s.value * s.value;
        r.tail_estimate = 4.0 * std::fabs(static_cast<double>(s.value)) * s.tail_estimate;
        return r;
    }
    case ClosedForm::D2Mixed11:
        return prime_sum(
            [e1](long double t) {
                const long double lg = std::log(t), X = std::exp(e1 * lg), Xm = std::expm1(e1 * lg);
                return lg * lg / X - X * lg * lg / (Xm * Xm);
            },
            cutoff, threads);
    case ClosedForm::D2Mixed12:
        return prime_sum(
            [e1](long double t) {
                const long double lg = std::log(t), X = std::exp(e1 * lg), Xm = std::expm1(e1 * lg);
                const long double l3 = lg * lg * lg;
                return X * (1 + X) * l3 / (Xm * Xm * Xm) - l3 / X;
            },
            cutoff, threads);
    case ClosedForm::D2Mixed22:
        return prime_sum(
            [e1](long double t) {
                const long double lg = std::log(t), X = std::exp(e1 * lg), Xm = std::expm1(e1 * lg);
                const long double l4 = lg * lg * lg * lg;
                return l4 / X - X * (1 + X * (4 + X)) * l4 / (Xm * Xm * Xm * Xm);
            },
            cutoff, threads);
    }
    return r;
}

// ---- finite differences ----

namespace {

struct Stencil {
    std::vector<int> offsets;
    std::vector<long double> weights;
};

// second-order central stencils; error expansions carry even powers of h only
const Stencil& central_stencil(int order)
{
    static const std::vector<Stencil> table = {
        {{0}, {1.0L}},
        {{-1, 1}, {-0.5L, 0.5L}},
        {{-1, 0, 1}, {1.0L, -2.0L, 1.0L}},
        {{-2, -1, 1, 2}, {-0.5L, 1.0L, -1.0L, 0.5L}},
        {{-2, -1, 0, 1, 2}, {1.0L, -4.0L, 6.0L, -4.0L, 1.0L}},
    };
    if (order < 0 || order >= static_cast<int>(table.size()))
        throw DomainError("finite differences: per-variable order must be 0..4");
    return table[order];
}

long double stencil_apply(long double t, DerivFamily f, const std::vector<int>& orders, double x,
                          long double step)
{
    const int nz = family_z_count(f);
    const int nv = static_cast<int>(orders.size());
    std::vector<const Stencil*> st(nv);
    int total = 0;
    for (int i = 0; i < nv; ++i) {
        st[i] = &central_stencil(orders[i]);
        total += orders[i];
    }
    LogAPoint pt;
    pt.z.assign(nz, 0.0);
    pt.w.assign(nv - nz, 0.0);
    pt.s = pt.u = pt.alpha = pt.beta = x / 2.0;
    std::vector<std::size_t> pos(nv, 0);
    long double acc = 0.0L;
    while (true) {
        long double wgt = 1.0L;
        for (int i = 0; i < nv; ++i) {
            wgt *= st[i]->weights[pos[i]];
            const double shift = static_cast<double>(st[i]->offsets[pos[i]] * step);
            if (i < nz)
                pt.z[i] = shift;
            else
                pt.w[i - nz] = shift;
        }
        acc += wgt * log_A_prime_term(t, pt);
        int i = 0;
        for (; i < nv; ++i) {
            if (++pos[i] < st[i]->offsets.size())
                break;
            pos[i] = 0;
        }
        if (i == nv)
            break;
    }
    return acc / std::pow(step, total);
}

}  // namespace

PrimeSumResult log_A_derivative_fd(DerivFamily f, const std::vector<int>& orders, double x, double h,
                                   std::uint64_t cutoff, StepMode mode, int threads)
{
    if (static_cast<int>(orders.size()) != family_z_count(f) + family_w_count(f))
        throw DomainError("log_A_derivative_fd: index length does not match the family");
    if (!(h > 0.0))
        throw DomainError("log_A_derivative_fd: step must be positive");
    auto per_prime = [&](long double t) {
        const long double step = (mode == StepMode::LogScaled) ? h / std::log(t) : h;
        const long double d1 = stencil_apply(t, f, orders, x, step);
        const long double d2 = stencil_apply(t, f, orders, x, step / 2);
        return (4.0L * d2 - d1) / 3.0L;
    };
    return prime_sum(per_prime, cutoff, threads);
}

FaaDiBrunoCheck faa_di_bruno_check(DerivFamily f, DerivLevel l, const std::vector<int>& orders, double x,
                                   double h, std::uint64_t cutoff, StepMode mode, int threads)
{
    FaaDiBrunoCheck out;
    out.closed_form = a_derivative_closed_form(f, l, orders, x, cutoff, threads).value;
    if (l == DerivLevel::LogA) {
        out.finite_diff = log_A_derivative_fd(f, orders, x, h, cutoff, mode, threads).value;
    } else {
        // slots: variable i repeated orders[i] times
        std::vector<int> slots;
        for (std::size_t i = 0; i < orders.size(); ++i)
            for (int k = 0; k < orders[i]; ++k)
                slots.push_back(static_cast<int>(i));
        std::map<std::vector<int>, long double> memo;
        auto dlog = [&](const std::vector<int>& o) {
            auto it = memo.find(o);
            if (it != memo.end())
                return it->second;
            const long double v = log_A_derivative_fd(f, o, x, h, cutoff, mode, threads).value;
            memo.emplace(o, v);
            return v;
        };
        KahanSum acc;
        for (const auto& part : set_partitions(static_cast<int>(slots.size()))) {
            long double term = 1.0L;
            for (const auto& block : part) {
                std::vector<int> o(orders.size(), 0);
                for (int s : block)
                    ++o[slots[s]];
                term *= dlog(o);
            }
            acc.add(term);
        }
        out.finite_diff = acc.value();
    }
    out.abs_error = static_cast<double>(std::fabs(out.closed_form - out.finite_diff));
    return out;
}

}  // namespace zmol
