#pragma once
// JSON configuration of a kappa computation.
//
// {
//   "schemaVersion": 1, "d": 1, "K": 3, "theta": "4/7", "R": 1.3036, "quadOrder": 64,
//   "P": { "P1": {"ell": [0], "basis": "x1mx", "coeffs": [...]},
//          "P2": {"ell": [2], "basis": "monomial", "coeffs": [0, ...], "weight": 1} },
//   "Q": {"basis": "odd", "coeffs": [...]}        (or a bare monomial array)
// }
//
// theta may be a number or a fraction string. The default piece weight is
// (-1)^{|l|} |l|!/prod l_r!.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "zmol/mollifier.hpp"

namespace zmol {

struct PieceSpec {
    std::string name;
    std::vector<int> ell;  // length d
    PolySpec poly;
    std::optional<double> weight;
};

struct KappaConfig {
    int schema_version = 1;
    int d = 1;
    int K = 1;
    double theta = 4.0 / 7.0;
    std::string theta_text;  // original spelling when given as a string
    double R = 1.0;
    std::vector<PieceSpec> pieces;  // sorted by name
    PolySpec Q;
    int quad_order = 64;

    void validate() const;
    double piece_weight(const PieceSpec& p) const;

    static KappaConfig from_json(const std::string& text);
    static KappaConfig load(const std::filesystem::path& file);
    std::string to_json() const;  // canonical, keys sorted, full precision
    std::uint64_t digest() const;  // FNV-1a of to_json()
};

// Parses "4/7", "0.5", "1e-3".
double parse_real(const std::string& s);

}  // namespace zmol
