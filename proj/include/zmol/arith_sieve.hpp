#pragma once
// Sieves for the classical arithmetic functions and dense Dirichlet
// convolution over tables indexed 1..n_max.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace zmol {

struct FnTable {
    std::size_t n_max = 0;
    std::vector<double> values;  // values[n-1] = f(n)
    std::string label;

    double operator[](std::size_t n) const { return values[n - 1]; }
    double& operator[](std::size_t n) { return values[n - 1]; }
};

// Indexes mu * Lambda_1^{*l_1} * ... * Lambda_d^{*l_d}, optionally times mu^2.
struct ConvolutionSpec {
    int d = 0;
    std::vector<int> exponents;
    bool squarefree_restricted = false;

    void validate() const;
    std::string label() const;
    // "d=1,l=2", "d=2,l=1:1", trailing ",sf" for the squarefree variant.
    static ConvolutionSpec parse(const std::string& text);
};

struct PrimeTable {
    std::uint64_t limit = 0;
    std::vector<std::uint32_t> primes;
};

PrimeTable sieve_primes(std::uint64_t limit);

FnTable mobius_sieve(std::size_t n_max);
FnTable mobius_sq_sieve(std::size_t n_max);
FnTable vonmangoldt_sieve(std::size_t n_max);
FnTable log_power_sieve(int k, std::size_t n_max);
FnTable dk_sieve(int k, std::size_t n_max);
FnTable unit_table(std::size_t n_max);   // the constant function 1
FnTable delta_table(std::size_t n_max);  // identity of *, 1 at n = 1

// Lambda_k via Lambda_{k+1} = Lambda_k log + Lambda * Lambda_k, Lambda_1 = Lambda.
FnTable lambda_k_sieve(int k, std::size_t n_max);

FnTable dirichlet_convolve(const FnTable& f, const FnTable& g);
FnTable pointwise_product(const FnTable& f, const FnTable& g);

// mu first, then ascending q, each Lambda_q repeated l_q times.
FnTable convolution_table(const ConvolutionSpec& spec, std::size_t n_max);

// Same value as convolution_table(spec, n)[n] by enumerating ordered
// factorizations; independent of every sieve above. Meant for n <= ~1e4.
double point_convolve(const ConvolutionSpec& spec, std::uint64_t n);

// Binary cache: 16-byte header (magic "ZMOLSIEV", u32 version, u32 zero),
// u64 n_max, u32 d, d x u32 exponents, u8 flag, then n_max raw f64. All LE.
std::filesystem::path cache_path(const std::filesystem::path& dir, const ConvolutionSpec& spec,
                                 std::size_t n_max);
void save_table_cache(const std::filesystem::path& file, const ConvolutionSpec& spec,
                      const FnTable& table);
std::optional<FnTable> load_table_cache(const std::filesystem::path& file,
                                        const ConvolutionSpec& spec, std::size_t n_max);
// Reads the cache when present, otherwise builds and (if dir is set) writes it.
FnTable convolution_table_cached(const ConvolutionSpec& spec, std::size_t n_max,
                                 const std::optional<std::filesystem::path>& dir);

}  // namespace zmol
