#include "zmol/main_terms.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "zmol/arith_sieve.hpp"
#include "zmol/combinatorics.hpp"

namespace zmol {

std::string to_string(ContourCase c)
{
    switch (c) {
    case ContourCase::A:
        return "A";
    case ContourCase::B:
        return "B";
    case ContourCase::C:
        return "C";
    }
    return "?";
}

namespace {

double signed_factorial_power(const std::vector<int>& v)
{
    // prod_r (r! (-1)^r)^{v_r}
    double c = 1.0;
    double fact = 1.0;
    for (std::size_t r = 1; r <= v.size(); ++r) {
        fact *= static_cast<double>(r);
        const double base = (r % 2 == 0) ? fact : -fact;
        c *= std::pow(base, v[r - 1]);
    }
    return c;
}

int weighted_sum(const std::vector<int>& v)
{
    int s = 0;
    for (std::size_t r = 1; r <= v.size(); ++r)
        s += static_cast<int>(r) * v[r - 1];
    return s;
}

double factorial_d(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

}  // namespace

CaseClassification classify(int d, const std::vector<int>& l)
{
    if (static_cast<int>(l.size()) != d)
        throw DomainError("classify: l must have length d");
    for (int x : l)
        if (x < 0)
            throw DomainError("classify: negative entry");
    CaseClassification cc;
    cc.omega = weighted_sum(l) - 1;
    cc.kase = cc.omega < 0 ? ContourCase::A : (cc.omega == 0 ? ContourCase::B : ContourCase::C);
    cc.coefficient = signed_factorial_power(l);
    return cc;
}

double contour_F(const CaseClassification& cc, const Poly& P, double alpha, double log_ratio, double logN,
                 int quad_order)
{
    if (!(log_ratio >= 0.0 && log_ratio <= 1.0))
        throw DomainError("contour_F: log_ratio must lie in [0,1]");
    if (!(logN > 0.0))
        throw DomainError("contour_F: log N must be positive");
    switch (cc.kase) {
    case ContourCase::A:
        return cc.coefficient / logN * (alpha * logN * P(log_ratio) + P.derivative()(log_ratio));
    case ContourCase::B:
        return cc.coefficient * P(log_ratio);
    case ContourCase::C: {
        if (cc.omega <= 0)
            throw DomainError("contour_F: case C requires omega > 0");
        const QuadRule& g = gauss_legendre(quad_order);
        KahanSum acc;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            const double a = g.x[i];
            acc.add(g.w[i] * P((1.0 - a) * log_ratio) * std::pow(a, cc.omega - 1) *
                    std::exp(-alpha * a * log_ratio * logN));
        }
        return cc.coefficient * std::pow(logN * log_ratio, cc.omega) / factorial_d(cc.omega - 1) *
               static_cast<double>(acc.value());
    }
    }
    return 0.0;
}

// ---- Euler-Maclaurin ----

EulerMaclaurinResult euler_maclaurin_sum(int k, const std::vector<int>& kvec, double z, EMForm form,
                                         const std::function<double(double)>& F,
                                         const std::function<double(double)>& H, double s, double x,
                                         int quad_order)
{
    if (k < 0)
        throw DomainError("euler_maclaurin_sum: k must be >= 0");
    if (!(z >= 2.0))
        throw DomainError("euler_maclaurin_sum: z must be >= 2");
    if (z > 5e7)
        throw ResourceError("euler_maclaurin_sum: z exceeds the sieve capacity 5e7");
    EulerMaclaurinResult r;
    r.K = k + weighted_sum(kvec);
    if (r.K < 1)
        throw DomainError("euler_maclaurin_sum: need k + sum r k_r >= 1");
    const std::size_t n = static_cast<std::size_t>(std::floor(z));

    FnTable g = (k == 0) ? delta_table(n) : dk_sieve(k, n);
    for (std::size_t q = 1; q <= kvec.size(); ++q) {
        if (kvec[q - 1] < 0)
            throw DomainError("euler_maclaurin_sum: negative exponent");
        if (kvec[q - 1] == 0)
            continue;
        const FnTable lam = lambda_k_sieve(static_cast<int>(q), n);
        for (int i = 0; i < kvec[q - 1]; ++i)
            g = dirichlet_convolve(g, lam);
    }
    double cst = 1.0;
    for (std::size_t j = 1; j <= kvec.size(); ++j)
        cst *= std::pow(factorial_d(static_cast<int>(j)), kvec[j - 1]);
    const double lz = std::log(z);

    KahanSum acc;
    if (form == EMForm::Counting) {
        for (std::size_t m = 1; m <= n; ++m)
            acc.add(g[m]);
        r.exact = static_cast<double>(acc.value());
        r.leading = cst * z * std::pow(lz, r.K - 1) / factorial_d(r.K - 1);
        return r;
    }
    const double xx = (x > 1.0) ? x : z;
    const double lx = std::log(xx);
    auto Fv = [&](double v) { return F ? F(v) : 1.0; };
    auto Hv = [&](double v) { return H ? H(v) : 1.0; };
    for (std::size_t m = 1; m <= n; ++m) {
        if (g[m] == 0.0)
            continue;
        const double lm = std::log(static_cast<double>(m));
        acc.add(g[m] * std::exp(-(1.0 + s) * lm) * Fv((lx - lm) / lx) * Hv((lz - lm) / lz));
    }
    r.exact = static_cast<double>(acc.value());
    const QuadRule& gq = gauss_legendre(quad_order);
    KahanSum in;
    for (std::size_t i = 0; i < gq.x.size(); ++i) {
        const double u = gq.x[i];
        in.add(gq.w[i] * std::pow(1.0 - u, r.K - 1) * Fv(1.0 - (1.0 - u) * lz / lx) * Hv(u) *
               std::exp(u * s * lz));
    }
    r.leading = cst * std::pow(lz, r.K) * std::exp(-s * lz) / factorial_d(r.K - 1) *
                static_cast<double>(in.value());
    return r;
}

std::pair<mpq_class, mpq_class> beta_identity(int kf, int kg)
{
    if (kf < 1 || kg < 1)
        throw DomainError("beta_identity: kf, kg must be >= 1");
    mpq_class lhs = 0;
    for (int j = 0; j <= kf - 1; ++j) {
        mpq_class t(binomial(kf - 1, j), mpz_class(kg + j));
        t.canonicalize();
        lhs += (j % 2 == 0) ? t : mpq_class(-t);
    }
    mpq_class rhs(factorial(kf - 1) * factorial(kg - 1), factorial(kf + kg - 1));
    rhs.canonicalize();
    return {lhs, rhs};
}

// ---- main term ----

std::shared_ptr<const RatioExpansion> cached_expansion(int d, const std::vector<int>& ell,
                                                       const std::vector<int>& ellbar, bool include_A)
{
    static std::mutex mu;
    static std::map<std::tuple<int, std::vector<int>, std::vector<int>, bool>,
                    std::shared_ptr<const RatioExpansion>>
        cache;
    const auto key = std::make_tuple(d, ell, ellbar, include_A);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end())
            return it->second;
    }
    std::shared_ptr<RatioExpansion> e;
    if (d == 0) {
        e = std::make_shared<RatioExpansion>();
        e->terms.emplace(RatioMonomial::unit(), 1);
    } else {
        e = std::make_shared<RatioExpansion>(expand_integrand(d, ell, ellbar, include_A));
    }
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(key, e).first->second;
}

namespace {

using Mat = std::vector<std::vector<double>>;

Mat zeros(int n)
{
    return Mat(n + 1, std::vector<double>(n + 1, 0.0));
}

// truncated product of bivariate jets
Mat bmul(const Mat& A, const Mat& B, int n)
{
    Mat R = zeros(n);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            if (A[i][j] == 0.0)
                continue;
            for (int a = 0; a + i <= n; ++a)
                for (int b = 0; b + j <= n; ++b)
                    R[i + a][j + b] += A[i][j] * B[a][b];
        }
    return R;
}

// Taylor jet in the shift variable of the contour-lemma factor for one piece,
// around a0 (= -R or +R), unit coefficient.
std::vector<double> fjet(int omega, const Poly& P, const Poly& dP, double a0, double theta, double u, int n,
                         const QuadRule& g)
{
    std::vector<double> J(n + 1, 0.0);
    if (omega == -1) {
        J[0] = theta * a0 * P(u) + dP(u);
        if (n >= 1)
            J[1] = theta * P(u);
    } else if (omega == 0) {
        J[0] = P(u);
    } else {
        const double pre = std::pow(u, omega) / factorial_d(omega - 1);
        for (int k = 0; k <= n; ++k) {
            KahanSum acc;
            for (std::size_t i = 0; i < g.x.size(); ++i) {
                const double a = g.x[i];
                acc.add(g.w[i] * std::pow(a, omega - 1) * P((1.0 - a) * u) * std::exp(-theta * a0 * a * u) *
                        std::pow(-theta * a * u, k));
            }
            J[k] = pre * static_cast<double>(acc.value()) / factorial_d(k);
        }
    }
    return J;
}

}  // namespace

double pair_main_term(const KappaConfig& cfg, const PieceSpec& pa, const PieceSpec& pb,
                      const RatioExpansion& expansion, std::size_t* groups_out, int quad_order_override)
{
    const int order = quad_order_override > 0 ? quad_order_override : cfg.quad_order;
    const QuadRule& g = gauss_legendre(order);
    const double R = cfg.R, theta = cfg.theta;
    const Poly Qm = cfg.Q.monomial();
    const int n = std::max(0, static_cast<int>(Qm.c.size()) - 1);
    const Poly Pa = pa.poly.monomial(), Pb = pb.poly.monomial();
    const Poly dPa = Pa.derivative(), dPb = Pb.derivative();

    // group monomials by (K', omega_l, omega_m); the C factors are scalars
    std::map<std::tuple<int, int, int>, long double> groups;
    for (const auto& [m, psi] : expansion.terms) {
        if (!m.atag.empty() && !(m.atag.size() == 1 && m.atag[0] == 0))
            continue;  // A-derivative terms are lower order
        const int Kp = 1 + weighted_sum(m.powers[0]);
        const int oml = weighted_sum(m.powers[1]) - 1;
        const int omm = weighted_sum(m.powers[2]) - 1;
        const long double w = static_cast<long double>(psi.get_d()) * signed_factorial_power(m.powers[0]) *
                              signed_factorial_power(m.powers[1]) * signed_factorial_power(m.powers[2]) /
                              factorial_d(Kp - 1);
        groups[{Kp, oml, omm}] += w;
    }
    if (groups_out)
        *groups_out = groups.size();

    // prefactor jets of 1/(theta(a+b)) and of the reflected term
    Mat P1 = zeros(n), E = zeros(n);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            P1[i][j] = -1.0 / (2.0 * R * theta) * binomial(i + j, i).get_d() * std::pow(1.0 / (2.0 * R), i + j);
            E[i][j] = (((i + j) % 2 == 0) ? 1.0 : -1.0) / (factorial_d(i) * factorial_d(j));
        }
    Mat P2 = bmul(P1, E, n);
    for (auto& row : P2)
        for (auto& v : row)
            v *= -std::exp(2.0 * R);

    // jets per (side, omega, sign of a0) at every u node
    std::map<std::tuple<int, int, int>, std::vector<std::vector<double>>> jets;
    auto jet_at = [&](int side, int omega, int sgn) -> const std::vector<std::vector<double>>& {
        auto key = std::make_tuple(side, omega, sgn);
        auto it = jets.find(key);
        if (it != jets.end())
            return it->second;
        std::vector<std::vector<double>> v;
        v.reserve(g.x.size());
        for (double u : g.x)
            v.push_back(side == 0 ? fjet(omega, Pa, dPa, sgn * R, theta, u, n, g)
                                  : fjet(omega, Pb, dPb, sgn * R, theta, u, n, g));
        return jets.emplace(key, std::move(v)).first->second;
    };

    KahanSum total;
    for (const auto& [key, weight] : groups) {
        if (weight == 0.0L)
            continue;
        const auto [Kp, oml, omm] = key;
        const auto& Jl_m = jet_at(0, oml, -1);
        const auto& Jm_m = jet_at(1, omm, -1);
        const auto& Jl_p = jet_at(0, oml, +1);
        const auto& Jm_p = jet_at(1, omm, +1);
        Mat G1 = zeros(n), G2 = zeros(n);
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            const double wt = g.w[q] * std::pow(1.0 - g.x[q], Kp - 1);
            for (int i = 0; i <= n; ++i)
                for (int j = 0; j <= n; ++j) {
                    const double sg = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                    G1[i][j] += wt * Jl_m[q][i] * Jm_m[q][j];
                    G2[i][j] += wt * sg * Jm_p[q][i] * Jl_p[q][j];
                }
        }
        const Mat A1 = bmul(P1, G1, n), A2 = bmul(P2, G2, n);
        KahanSum c;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                const double sg = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                c.add(Qm.c[i] * Qm.c[j] * sg * factorial_d(i) * factorial_d(j) * (A1[i][j] + A2[i][j]));
            }
        total.add(weight * c.value());
    }
    return static_cast<double>(total.value());
}

namespace {

std::vector<double> pair_contributions(const KappaConfig& cfg, int threads, int order,
                                       std::vector<std::string>* ids, std::size_t* monomials,
                                       std::size_t* groups)
{
    struct Item {
        const PieceSpec* a;
        const PieceSpec* b;
    };
    std::vector<Item> items;
    for (const auto& a : cfg.pieces)
        for (const auto& b : cfg.pieces)
            items.push_back({&a, &b});
    // build expansions up front, serially, so the workers only read them
    std::vector<std::shared_ptr<const RatioExpansion>> ex(items.size());
    for (std::size_t i = 0; i < items.size(); ++i)
        ex[i] = cached_expansion(cfg.d, items[i].a->ell, items[i].b->ell, false);

    std::vector<double> out(items.size(), 0.0);
    std::vector<std::size_t> grp(items.size(), 0);
    std::vector<std::exception_ptr> errs(items.size());
    auto work = [&](std::size_t i) {
        try {
            const double v = pair_main_term(cfg, *items[i].a, *items[i].b, *ex[i], &grp[i], order);
            out[i] = ex[i]->sign * cfg.piece_weight(*items[i].a) * cfg.piece_weight(*items[i].b) * v;
        } catch (...) {
            errs[i] = std::current_exception();
        }
    };
    const int nt = std::max(1, threads);
    if (nt == 1) {
        for (std::size_t i = 0; i < items.size(); ++i)
            work(i);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t i = static_cast<std::size_t>(t); i < items.size(); i += static_cast<std::size_t>(nt))
                    work(i);
            });
        for (auto& th : pool)
            th.join();
    }
    for (auto& e : errs)
        if (e)
            std::rethrow_exception(e);
    if (ids)
        for (const auto& it : items)
            ids->push_back(it.a->name + "x" + it.b->name);
    if (monomials) {
        *monomials = 0;
        for (const auto& e : ex)
            *monomials += e->terms.size();
    }
    if (groups) {
        *groups = 0;
        for (std::size_t v : grp)
            *groups += v;
    }
    return out;
}

}  // namespace

MainTermValue assemble_main_term(const KappaConfig& cfg, const MainTermOptions& opt)
{
    cfg.validate();
    MainTermValue r;
    std::vector<std::string> ids;
    const std::vector<double> parts =
        pair_contributions(cfg, opt.threads, cfg.quad_order, &ids, &r.monomials, &r.groups);
    KahanSum c;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        c.add(parts[i]);
        r.breakdown.push_back({ids[i], parts[i]});
    }
    r.c = static_cast<double>(c.value());
    if (opt.check_quadrature) {
        const std::vector<double> p2 =
            pair_contributions(cfg, opt.threads, std::min(2 * cfg.quad_order, 512), nullptr, nullptr, nullptr);
        KahanSum c2;
        for (double v : p2)
            c2.add(v);
        r.quad_delta = std::fabs(static_cast<double>(c2.value()) - r.c);
        r.precision_warning = r.quad_delta > 1e-9;
    }
    if (opt.a_diagnostics && cfg.d > 0) {
        for (const auto& a : cfg.pieces)
            for (const auto& b : cfg.pieces)
                for (const auto& [m, psi] : cached_expansion(cfg.d, a.ell, b.ell, true)->terms)
                    if (!m.atag.empty() && !(m.atag.size() == 1 && m.atag[0] == 0))
                        ++r.dropped_a_terms;
    }
    r.kappa = kappa_bound(r.c, cfg.R);
    return r;
}

double kappa_bound(double c, double R)
{
    if (!(c > 0.0))
        throw DomainError("kappa_bound: the main term c must be positive (got " + fmt_double(c) + ")");
    if (!(R > 0.0))
        throw DomainError("kappa_bound: R must be positive");
    return 1.0 - std::log(c) / R;
}

}  // namespace zmol
