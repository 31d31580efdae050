#include "zmol/arith_sieve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "zmol/numeric.hpp"

namespace zmol {

void ConvolutionSpec::validate() const
{
    if (d < 0)
        throw DomainError("convolution spec: d must be >= 0");
    if (static_cast<int>(exponents.size()) != d)
        throw DomainError("convolution spec: need exactly d exponents");
    for (int e : exponents)
        if (e < 0)
            throw DomainError("convolution spec: exponents must be >= 0");
}

std::string ConvolutionSpec::label() const
{
    std::string s = "mu";
    for (int q = 1; q <= d; ++q)
        if (exponents[q - 1] > 0)
            s += "*L" + std::to_string(q) + "^" + std::to_string(exponents[q - 1]);
    if (squarefree_restricted)
        s += "[sf]";
    return s;
}

ConvolutionSpec ConvolutionSpec::parse(const std::string& text)
{
    ConvolutionSpec spec;
    bool have_d = false;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "sf") {
            spec.squarefree_restricted = true;
        } else if (item.rfind("d=", 0) == 0) {
            spec.d = std::stoi(item.substr(2));
            have_d = true;
        } else if (item.rfind("l=", 0) == 0) {
            std::string v = item.substr(2);
            for (char& ch : v)
                if (ch == ':')
                    ch = ',';
            spec.exponents = parse_int_list(v);
        } else if (!item.empty()) {
            throw DomainError("convolution spec: unknown field '" + item + "'");
        }
    }
    if (!have_d)
        spec.d = static_cast<int>(spec.exponents.size());
    spec.validate();
    return spec;
}

PrimeTable sieve_primes(std::uint64_t limit)
{
    if (limit < 2)
        throw DomainError("sieve_primes: empty range (limit < 2)");
    if (limit > 4000000000ULL)
        throw ResourceError("sieve_primes: limit above 4e9 is not supported");
    PrimeTable t;
    t.limit = limit;
    t.primes.push_back(2);
    // odd-only byte sieve, index i stands for 2i+1
    const std::uint64_t half = (limit - 1) / 2;
    std::vector<std::uint8_t> composite(half + 1, 0);
    for (std::uint64_t i = 1; i <= half; ++i) {
        if (composite[i])
            continue;
        const std::uint64_t p = 2 * i + 1;
        t.primes.push_back(static_cast<std::uint32_t>(p));
        if (p * p > limit)
            continue;
        for (std::uint64_t j = (p * p - 1) / 2; j <= half; j += p)
            composite[j] = 1;
    }
    return t;
}

namespace {

FnTable blank(std::size_t n_max, std::string label)
{
    if (n_max < 1)
        throw DomainError("table size must be >= 1");
    FnTable t;
    t.n_max = n_max;
    t.values.assign(n_max, 0.0);
    t.label = std::move(label);
    return t;
}

// smallest prime factor via a linear sieve
std::vector<std::uint32_t> spf_table(std::size_t n_max)
{
    std::vector<std::uint32_t> spf(n_max + 1, 0);
    std::vector<std::uint32_t> primes;
    for (std::size_t i = 2; i <= n_max; ++i) {
        if (spf[i] == 0) {
            spf[i] = static_cast<std::uint32_t>(i);
            primes.push_back(static_cast<std::uint32_t>(i));
        }
        for (std::uint32_t p : primes) {
            if (p > spf[i] || static_cast<std::uint64_t>(p) * i > n_max)
                break;
            spf[p * i] = p;
        }
    }
    return spf;
}

}  // namespace

FnTable mobius_sieve(std::size_t n_max)
{
    FnTable t = blank(n_max, "mu");
    auto spf = spf_table(n_max);
    t[1] = 1.0;
    for (std::size_t n = 2; n <= n_max; ++n) {
        std::size_t p = spf[n], m = n / p;
        t[n] = (m % p == 0) ? 0.0 : -t[m];
    }
    return t;
}

FnTable mobius_sq_sieve(std::size_t n_max)
{
    FnTable t = mobius_sieve(n_max);
    for (auto& v : t.values)
        v = v * v;
    t.label = "mu^2";
    return t;
}

FnTable vonmangoldt_sieve(std::size_t n_max)
{
    FnTable t = blank(n_max, "Lambda");
    auto spf = spf_table(n_max);
    for (std::size_t n = 2; n <= n_max; ++n) {
        std::size_t p = spf[n], m = n;
        while (m % p == 0)
            m /= p;
        if (m == 1)
            t[n] = std::log(static_cast<double>(p));
    }
    return t;
}

FnTable log_power_sieve(int k, std::size_t n_max)
{
    if (k < 0)
        throw DomainError("log_power_sieve: k must be >= 0");
    FnTable t = blank(n_max, "log^" + std::to_string(k));
    for (std::size_t n = 1; n <= n_max; ++n)
        t[n] = (k == 0) ? 1.0 : std::pow(std::log(static_cast<double>(n)), k);
    return t;
}

FnTable dk_sieve(int k, std::size_t n_max)
{
    if (k < 1)
        throw DomainError("dk_sieve: k must be >= 1");
    FnTable t = blank(n_max, "d_" + std::to_string(k));
    auto spf = spf_table(n_max);
    // d_k(p^e) = C(e+k-1, k-1), multiplicative
    auto local = [k](int e) {
        double r = 1.0;
        for (int i = 1; i <= e; ++i)
            r = r * (k - 1 + i) / i;
        return r;
    };
    t[1] = 1.0;
    for (std::size_t n = 2; n <= n_max; ++n) {
        std::size_t p = spf[n], m = n;
        int e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        t[n] = t[m] * std::round(local(e));
    }
    return t;
}

FnTable unit_table(std::size_t n_max)
{
    FnTable t = blank(n_max, "1");
    std::fill(t.values.begin(), t.values.end(), 1.0);
    return t;
}

FnTable delta_table(std::size_t n_max)
{
    FnTable t = blank(n_max, "delta");
    t[1] = 1.0;
    return t;
}

FnTable dirichlet_convolve(const FnTable& f, const FnTable& g)
{
    if (f.n_max != g.n_max)
        throw DomainError("dirichlet_convolve: dimension mismatch");
    const std::size_t N = f.n_max;
    FnTable h = blank(N, "(" + f.label + ")*(" + g.label + ")");
    for (std::size_t a = 1; a <= N; ++a) {
        const double fa = f[a];
        if (fa == 0.0)
            continue;
        for (std::size_t b = 1, ab = a; ab <= N; ++b, ab += a)
            h[ab] += fa * g[b];
    }
    return h;
}

FnTable pointwise_product(const FnTable& f, const FnTable& g)
{
    if (f.n_max != g.n_max)
        throw DomainError("pointwise_product: dimension mismatch");
    FnTable h = f;
    for (std::size_t i = 0; i < h.values.size(); ++i)
        h.values[i] *= g.values[i];
    h.label = f.label + "." + g.label;
    return h;
}

FnTable lambda_k_sieve(int k, std::size_t n_max)
{
    if (k < 1)
        throw DomainError("lambda_k_sieve: k must be >= 1 (Lambda_0 is undefined; use delta_table)");
    const FnTable lam = vonmangoldt_sieve(n_max);
    FnTable cur = lam;
    for (int j = 1; j < k; ++j) {
        FnTable next = dirichlet_convolve(lam, cur);
        for (std::size_t n = 2; n <= n_max; ++n)
            next[n] += cur[n] * std::log(static_cast<double>(n));
        cur = std::move(next);
    }
    cur.label = "Lambda_" + std::to_string(k);
    return cur;
}

FnTable convolution_table(const ConvolutionSpec& spec, std::size_t n_max)
{
    spec.validate();
    FnTable t = mobius_sieve(n_max);
    for (int q = 1; q <= spec.d; ++q) {
        if (spec.exponents[q - 1] == 0)
            continue;
        const FnTable lq = lambda_k_sieve(q, n_max);
        for (int r = 0; r < spec.exponents[q - 1]; ++r)
            t = dirichlet_convolve(t, lq);
    }
    if (spec.squarefree_restricted)
        t = pointwise_product(t, mobius_sq_sieve(n_max));
    t.label = spec.label();
    return t;
}

namespace {

std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n)
{
    std::vector<std::pair<std::uint64_t, int>> f;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p)
            continue;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.emplace_back(p, e);
    }
    if (n > 1)
        f.emplace_back(n, 1);
    return f;
}

std::vector<std::uint64_t> divisors(std::uint64_t n)
{
    std::vector<std::uint64_t> d{1};
    for (auto [p, e] : factorize(n)) {
        std::size_t sz = d.size();
        std::uint64_t pk = 1;
        for (int i = 1; i <= e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < sz; ++j)
                d.push_back(d[j] * pk);
        }
    }
    std::sort(d.begin(), d.end());
    return d;
}

int mu_point(std::uint64_t n)
{
    int m = 1;
    for (auto [p, e] : factorize(n)) {
        if (e > 1)
            return 0;
        m = -m;
    }
    return m;
}

// definitional Lambda_q(n) = sum_{e | n} mu(e) log^q(n/e)
double lambda_point(int q, std::uint64_t n)
{
    double s = 0.0;
    for (std::uint64_t e : divisors(n)) {
        int m = mu_point(e);
        if (m != 0)
            s += m * std::pow(std::log(static_cast<double>(n / e)), q);
    }
    return s;
}

}  // namespace

double point_convolve(const ConvolutionSpec& spec, std::uint64_t n)
{
    spec.validate();
    if (n < 1)
        throw DomainError("point_convolve: n must be >= 1");
    if (spec.squarefree_restricted && mu_point(n) == 0)
        return 0.0;
    // factor function list: 0 = mu, q >= 1 = Lambda_q
    std::vector<int> fns{0};
    for (int q = 1; q <= spec.d; ++q)
        for (int r = 0; r < spec.exponents[q - 1]; ++r)
            fns.push_back(q);
    const auto divs = divisors(n);
    std::map<std::uint64_t, std::size_t> pos;
    for (std::size_t i = 0; i < divs.size(); ++i)
        pos[divs[i]] = i;
    std::map<int, std::vector<double>> fval;  // fn id -> value at each divisor
    for (int f : fns) {
        if (fval.count(f))
            continue;
        auto& v = fval[f];
        for (auto a : divs)
            v.push_back(f == 0 ? mu_point(a) : lambda_point(f, a));
    }
    // memo[i][j] = value of (fns[i] * ... * fns[last])(divs[j])
    const std::size_t F = fns.size();
    std::vector<std::vector<double>> memo(F, std::vector<double>(divs.size(), 0.0));
    memo[F - 1] = fval[fns[F - 1]];
    for (std::size_t i = F - 1; i-- > 0;) {
        const auto& fv = fval[fns[i]];
        for (std::size_t j = 0; j < divs.size(); ++j) {
            double s = 0.0;
            for (std::size_t a = 0; a < divs.size(); ++a) {
                if (divs[j] % divs[a])
                    continue;
                s += fv[a] * memo[i + 1][pos[divs[j] / divs[a]]];
            }
            memo[i][j] = s;
        }
    }
    return memo[0][divs.size() - 1];
}

namespace {

constexpr char kMagic[8] = {'Z', 'M', 'O', 'L', 'S', 'I', 'E', 'V'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::ostream& os, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
bool get_u32(std::istream& is, std::uint32_t& v)
{
    v = 0;
    for (int i = 0; i < 4; ++i) {
        int ch = is.get();
        if (ch == EOF)
            return false;
        v |= static_cast<std::uint32_t>(ch & 0xff) << (8 * i);
    }
    return true;
}
bool get_u64(std::istream& is, std::uint64_t& v)
{
    v = 0;
    for (int i = 0; i < 8; ++i) {
        int ch = is.get();
        if (ch == EOF)
            return false;
        v |= static_cast<std::uint64_t>(ch & 0xff) << (8 * i);
    }
    return true;
}

}  // namespace

std::filesystem::path cache_path(const std::filesystem::path& dir, const ConvolutionSpec& spec,
                                 std::size_t n_max)
{
    std::string name = "conv_d" + std::to_string(spec.d) + "_l";
    for (std::size_t i = 0; i < spec.exponents.size(); ++i)
        name += (i ? "-" : "") + std::to_string(spec.exponents[i]);
    name += spec.squarefree_restricted ? "_sf" : "_all";
    name += "_n" + std::to_string(n_max) + ".bin";
    return dir / name;
}

void save_table_cache(const std::filesystem::path& file, const ConvolutionSpec& spec,
                      const FnTable& table)
{
    std::ofstream os(file, std::ios::binary);
    if (!os)
        throw ResourceError("cannot write sieve cache " + file.string());
    os.write(kMagic, 8);
    put_u32(os, kVersion);
    put_u32(os, 0);
    put_u64(os, table.n_max);
    put_u32(os, static_cast<std::uint32_t>(spec.d));
    for (int e : spec.exponents)
        put_u32(os, static_cast<std::uint32_t>(e));
    os.put(spec.squarefree_restricted ? 1 : 0);
    for (double v : table.values)
        put_u64(os, std::bit_cast<std::uint64_t>(v));
    if (!os)
        throw ResourceError("short write on sieve cache " + file.string());
}

std::optional<FnTable> load_table_cache(const std::filesystem::path& file,
                                        const ConvolutionSpec& spec, std::size_t n_max)
{
    std::ifstream is(file, std::ios::binary);
    if (!is)
        return std::nullopt;
    char magic[8];
    if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kMagic))
        return std::nullopt;
    std::uint32_t ver = 0, pad = 0, d = 0;
    std::uint64_t n = 0;
    if (!get_u32(is, ver) || ver != kVersion || !get_u32(is, pad) || !get_u64(is, n) || n != n_max)
        return std::nullopt;
    if (!get_u32(is, d) || static_cast<int>(d) != spec.d)
        return std::nullopt;
    for (int e : spec.exponents) {
        std::uint32_t v = 0;
        if (!get_u32(is, v) || static_cast<int>(v) != e)
            return std::nullopt;
    }
    int flag = is.get();
    if (flag != (spec.squarefree_restricted ? 1 : 0))
        return std::nullopt;
    FnTable t = blank(n_max, spec.label());
    for (auto& v : t.values) {
        std::uint64_t bits = 0;
        if (!get_u64(is, bits))
            return std::nullopt;
        v = std::bit_cast<double>(bits);
    }
    return t;
}

FnTable convolution_table_cached(const ConvolutionSpec& spec, std::size_t n_max,
                                 const std::optional<std::filesystem::path>& dir)
{
    if (dir) {
        auto file = cache_path(*dir, spec, n_max);
        if (auto hit = load_table_cache(file, spec, n_max))
            return *hit;
        FnTable t = convolution_table(spec, n_max);
        std::filesystem::create_directories(*dir);
        save_table_cache(file, spec, t);
        return t;
    }
    return convolution_table(spec, n_max);
}

}  // namespace zmol
