#pragma once
// Main term of the mollified second moment. Every monomial of the residue
// expansion is pushed through the contour lemma (cases A, B, C by omega),
// the Euler-Maclaurin integral, and the two Q operators, and the result is
// integrated by Gauss-Legendre quadrature in the T-free scaled variables.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "zmol/config.hpp"
#include "zmol/numeric.hpp"
#include "zmol/series_residue.hpp"

namespace zmol {

enum class ContourCase { A, B, C };
std::string to_string(ContourCase c);

struct CaseClassification {
    int omega = -1;  // sum r l_r - 1
    ContourCase kase = ContourCase::A;
    double coefficient = 1.0;  // prod_r (r! (-1)^r)^{l_r}
};

CaseClassification classify(int d, const std::vector<int>& l);

// F for a single n with log_ratio = log(N/n)/log N:
//   A: (coef/log N) d/dx [N^{alpha x} P(x + r)] at x = 0
//   B: coef P(r)
//   C: coef (log N)^omega r^omega/(omega-1)! int_0^1 P((1-a) r) a^{omega-1} e^{-alpha a r log N} da
// The case C sign is +1 for every omega.
double contour_F(const CaseClassification& cc, const Poly& P, double alpha, double log_ratio, double logN,
                 int quad_order = 64);

enum class EMForm {
    Counting,  // sum_{n<=z} g(n) against prod (j!)^{k_j} z log^{K-1} z/(K-1)!
    Weighted,  // sum_{n<=z} g(n)/n^{1+s} F(log(x/n)/log x) H(log(z/n)/log z)
};

struct EulerMaclaurinResult {
    double exact = 0.0;
    double leading = 0.0;
    int K = 0;  // k + sum r k_r
};

// g = d_k * Lambda_1^{*k_1} * ... * Lambda_m^{*k_m}. For the weighted form the
// leading term is prod (j!)^{k_j} (log z)^K/(z^s (K-1)!) int (1-u)^{K-1}
// F(1 - (1-u) log z/log x) H(u) z^{us} du. z is capped at 5e7.
EulerMaclaurinResult euler_maclaurin_sum(int k, const std::vector<int>& kvec, double z, EMForm form,
                                         const std::function<double(double)>& F = nullptr,
                                         const std::function<double(double)>& H = nullptr, double s = 0.0,
                                         double x = 0.0, int quad_order = 64);

// Both sides of sum_j C(kf-1, j)(-1)^j/(kg+j) = (kf-1)!(kg-1)!/(kf+kg-1)!.
std::pair<mpq_class, mpq_class> beta_identity(int kf, int kg);

struct TermContribution {
    std::string id;  // "P1xP2"
    double contribution = 0.0;
};

struct MainTermValue {
    double c = 0.0;
    double kappa = 0.0;
    std::vector<TermContribution> breakdown;
    std::size_t monomials = 0;       // residue monomials processed
    std::size_t groups = 0;          // distinct (K', omega_l, omega_m) integrals evaluated
    std::size_t dropped_a_terms = 0; // A-derivative tagged monomials (diagnostic mode only)
    double quad_delta = -1.0;        // |c(2 order) - c(order)|, -1 when not checked
    bool precision_warning = false;
};

struct MainTermOptions {
    int threads = 1;
    bool check_quadrature = false;
    bool a_diagnostics = false;
};

// Expansions are memoized per (d, l, lbar); thread-safe.
std::shared_ptr<const RatioExpansion> cached_expansion(int d, const std::vector<int>& ell,
                                                       const std::vector<int>& ellbar, bool include_A = false);

// Contribution sum Psi * c_term of one ordered pair of pieces, before the
// sign (-1)^{sum q l_q + sum q lbar_q} and the piece weights.
double pair_main_term(const KappaConfig& cfg, const PieceSpec& a, const PieceSpec& b,
                      const RatioExpansion& expansion, std::size_t* groups = nullptr,
                      int quad_order_override = 0);

MainTermValue assemble_main_term(const KappaConfig& cfg, const MainTermOptions& opt = {});

double kappa_bound(double c, double R);

}  // namespace zmol
