#include "zmol/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "zmol/combinatorics.hpp"
#include "zmol/numeric.hpp"

namespace zmol {

using nlohmann::json;

double parse_real(const std::string& s)
{
    const auto slash = s.find('/');
    try {
        std::size_t pos = 0;
        if (slash == std::string::npos) {
            const double v = std::stod(s, &pos);
            if (pos != s.size())
                throw ConfigError("trailing characters");
            return v;
        }
        const std::string a = s.substr(0, slash), b = s.substr(slash + 1);
        std::size_t pa = 0, pb = 0;
        const double num = std::stod(a, &pa), den = std::stod(b, &pb);
        if (pa != a.size() || pb != b.size() || den == 0.0)
            throw ConfigError("bad fraction");
        return num / den;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse real number '" + s + "'");
    }
}

namespace {

std::vector<double> coeff_array(const json& j, const std::string& what)
{
    if (!j.is_array())
        throw ConfigError(what + ": coeffs must be an array");
    std::vector<double> v;
    for (const auto& x : j) {
        if (!x.is_number())
            throw ConfigError(what + ": coefficients must be numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

PolySpec poly_from_json(const json& j, PolyConstraint constraint, PolyBasis default_basis,
                        const std::string& what)
{
    PolySpec p;
    p.constraint = constraint;
    if (j.is_array()) {
        p.basis = PolyBasis::Monomial;
        p.params = coeff_array(j, what);
        return p;
    }
    if (!j.is_object())
        throw ConfigError(what + ": expected an object or an array");
    p.basis = j.contains("basis") ? basis_from_string(j.at("basis").get<std::string>()) : default_basis;
    if (!j.contains("coeffs"))
        throw ConfigError(what + ": missing coeffs");
    p.params = coeff_array(j.at("coeffs"), what);
    if (j.contains("constraint"))
        p.constraint = constraint_from_string(j.at("constraint").get<std::string>());
    return p;
}

json poly_to_json(const PolySpec& p)
{
    json j;
    j["basis"] = to_string(p.basis);
    j["coeffs"] = p.params;
    j["constraint"] = to_string(p.constraint);
    return j;
}

}  // namespace

void KappaConfig::validate() const
{
    if (schema_version != 1)
        throw ConfigError("unsupported schemaVersion " + std::to_string(schema_version));
    if (d < 0)
        throw ConfigError("d must be >= 0");
    if (K < 0)
        throw ConfigError("K must be >= 0");
    if (!(theta > 0.0 && theta <= 4.0 / 7.0 + 1e-12))
        throw ConfigError("theta must lie in (0, 4/7]");
    if (!(R > 0.0))
        throw ConfigError("R must be positive");
    if (quad_order < 4 || quad_order > 512)
        throw ConfigError("quadOrder must lie in [4, 512]");
    if (pieces.empty())
        throw ConfigError("at least one mollifier piece is required");
    for (const auto& p : pieces) {
        if (static_cast<int>(p.ell.size()) != d)
            throw ConfigError("piece " + p.name + ": ell must have length d");
        int total = 0;
        for (int x : p.ell) {
            if (x < 0)
                throw ConfigError("piece " + p.name + ": negative exponent");
            total += x;
        }
        if (total > K)
            throw ConfigError("piece " + p.name + ": |ell| exceeds K");
        try {
            p.poly.validate();
        } catch (const ConfigError& e) {
            throw ConfigError("piece " + p.name + ": " + e.what());
        }
    }
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
        if (pieces[i].name == pieces[i + 1].name)
            throw ConfigError("duplicate piece name " + pieces[i].name);
    if (Q.constraint != PolyConstraint::Q)
        throw ConfigError("Q must carry the Q constraint");
    try {
        Q.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("Q: ") + e.what());
    }
}

double KappaConfig::piece_weight(const PieceSpec& p) const
{
    if (p.weight)
        return *p.weight;
    int total = 0;
    for (int x : p.ell)
        total += x;
    const double m = multinomial(total, p.ell).get_d();
    return (total % 2 == 0) ? m : -m;
}

KappaConfig KappaConfig::from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known = {"schemaVersion", "d", "K", "theta", "R", "P", "Q", "quadOrder"};
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw ConfigError("unknown config key '" + k + "'");
    KappaConfig c;
    try {
        c.schema_version = j.value("schemaVersion", 1);
        c.d = j.at("d").get<int>();
        c.K = j.at("K").get<int>();
        const json& th = j.at("theta");
        if (th.is_string()) {
            c.theta_text = th.get<std::string>();
            c.theta = parse_real(c.theta_text);
        } else {
            c.theta = th.get<double>();
        }
        c.R = j.at("R").get<double>();
        c.quad_order = j.value("quadOrder", 64);
        for (const auto& [name, pj] : j.at("P").items()) {
            PieceSpec p;
            p.name = name;
            if (!pj.is_object() || !pj.contains("ell"))
                throw ConfigError("piece " + name + ": needs an object with ell");
            p.ell = pj.at("ell").get<std::vector<int>>();
            const bool base_piece = std::all_of(p.ell.begin(), p.ell.end(), [](int x) { return x == 0; });
            p.poly = poly_from_json(pj, base_piece ? PolyConstraint::P0 : PolyConstraint::Pk,
                                    PolyBasis::Monomial, "piece " + name);
            if (pj.contains("weight"))
                p.weight = pj.at("weight").get<double>();
            c.pieces.push_back(std::move(p));
        }
        c.Q = poly_from_json(j.at("Q"), PolyConstraint::Q, PolyBasis::OddPowers, "Q");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    std::sort(c.pieces.begin(), c.pieces.end(),
              [](const PieceSpec& a, const PieceSpec& b) { return a.name < b.name; });
    c.validate();
    return c;
}

KappaConfig KappaConfig::load(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw ConfigError("cannot open config " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string KappaConfig::to_json() const
{
    json j;
    j["schemaVersion"] = schema_version;
    j["d"] = d;
    j["K"] = K;
    if (!theta_text.empty())
        j["theta"] = theta_text;
    else
        j["theta"] = theta;
    j["R"] = R;
    j["quadOrder"] = quad_order;
    json P = json::object();
    for (const auto& p : pieces) {
        json pj = poly_to_json(p.poly);
        pj["ell"] = p.ell;
        if (p.weight)
            pj["weight"] = *p.weight;
        P[p.name] = pj;
    }
    j["P"] = P;
    j["Q"] = poly_to_json(Q);
    return j.dump(2);
}

std::uint64_t KappaConfig::digest() const
{
    return fnv1a64(to_json());
}

}  // namespace zmol
