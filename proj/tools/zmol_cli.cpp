// zmol command line entry point. Primary results go to stdout or --out files;
// the run manifest goes to <out>.manifest.json, or to stderr without --out.

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "zmol/arith_sieve.hpp"
#include "zmol/combinatorics.hpp"
#include "zmol/config.hpp"
#include "zmol/euler_product.hpp"
#include "zmol/main_terms.hpp"
#include "zmol/mollifier.hpp"
#include "zmol/numeric.hpp"
#include "zmol/optimizer.hpp"
#include "zmol/series_residue.hpp"

namespace {

using namespace zmol;
using nlohmann::json;

constexpr const char* kToolVersion = "0.1.0";

struct Manifest {
    std::string subcommand;
    json flags = json::object();
    std::string config_digest;
    std::string out;
};

std::string utc_timestamp()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void emit_manifest(const Manifest& m)
{
    json j;
    j["subcommand"] = m.subcommand;
    j["flags"] = m.flags;
    j["configDigest"] = m.config_digest;
    j["toolVersion"] = kToolVersion;
    j["timestamp"] = utc_timestamp();
    if (m.out.empty()) {
        std::cerr << "manifest: " << j.dump() << "\n";
        return;
    }
    std::ofstream f(m.out + ".manifest.json");
    f << j.dump(2) << "\n";
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw DomainError("cannot write " + path);
    f << text;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_count(const std::string& s)
{
    const double v = parse_real(s);
    if (!(v >= 0.0) || v > 1e12 || v != std::floor(v))
        throw ConfigError("expected a non-negative integer, got '" + s + "'");
    return static_cast<std::uint64_t>(v);
}

std::vector<double> parse_grid(const std::string& s)
{
    // "a:b:n" for n evenly spaced points, or an explicit list
    if (s.find(':') == std::string::npos)
        return parse_double_list(s);
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':'))
        parts.push_back(item);
    if (parts.size() != 3)
        throw ConfigError("grid must be a:b:n");
    const double a = parse_real(parts[0]), b = parse_real(parts[1]);
    const int n = std::stoi(parts[2]);
    if (n < 1)
        throw ConfigError("grid needs at least one point");
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return g;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"zmol: mollified second moment toolkit"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1, 256));

    Manifest man;

    // sieve
    auto* sieve = app.add_subcommand("sieve", "build a convolution table and write the binary cache");
    std::string sieve_spec, sieve_nmax = "1000000", sieve_out;
    sieve->add_option("--spec", sieve_spec, "d=1,l=2[,sf]")->required();
    sieve->add_option("--nmax", sieve_nmax, "table length");
    sieve->add_option("--out", sieve_out, "cache directory");

    // bell
    auto* bell = app.add_subcommand("bell", "Bell polynomials and diagram counts");
    int bell_n = -1, bell_k = -1, bell_d = 1, bell_K = 1;
    bool bell_diagrams = false, bell_poly = false;
    bell->add_option("--n", bell_n, "degree n");
    bell->add_option("--k", bell_k, "partial Bell index k (omit for complete)");
    bell->add_flag("--diagrams", bell_diagrams, "count diagrams of the d, K truncation");
    bell->add_option("--d", bell_d, "mollifier dimension for --diagrams");
    bell->add_option("--K", bell_K, "truncation for --diagrams");
    bell->add_flag("--poly", bell_poly, "with --diagrams, print the polynomial too");

    // expand
    auto* expand = app.add_subcommand("expand", "residue expansion of the ratio integrand");
    int ex_d = 1;
    std::string ex_l, ex_lbar, ex_format = "text";
    bool ex_A = false;
    expand->add_option("--d", ex_d, "dimension")->required();
    expand->add_option("--l", ex_l, "exponent vector l")->required();
    expand->add_option("--lbar", ex_lbar, "exponent vector lbar")->required();
    expand->add_option("--format", ex_format, "text|json")->check(CLI::IsMember({"text", "json"}));
    expand->add_flag("--with-A", ex_A, "keep A-derivative tagged terms");

    // prime-sum
    auto* psum = app.add_subcommand("prime-sum", "arithmetic-factor derivative as a prime sum");
    std::string ps_index, ps_family = "d1l1", ps_level = "A", ps_cutoff = "1e8";
    double ps_x = 0.0;
    psum->add_option("--index", ps_index, "derivative orders, one per shift variable")->required();
    psum->add_option("--x", ps_x, "alpha + beta");
    psum->add_option("--cutoff", ps_cutoff, "prime cutoff");
    psum->add_option("--family", ps_family, "d1l1|d1l2|d2l11");
    psum->add_option("--level", ps_level, "A|logA");

    // compare-sums
    auto* cmp = app.add_subcommand("compare-sums", "restricted vs unrestricted partial sums");
    std::string cmp_spec, cmp_csv;
    std::size_t cmp_xmax = 1000;
    cmp->add_option("--spec", cmp_spec, "d=1,l=2")->required();
    cmp->add_option("--xmax", cmp_xmax, "largest x");
    cmp->add_option("--csv", cmp_csv, "CSV output file (stdout if omitted)");

    // mollify
    auto* moll = app.add_subcommand("mollify", "mollifier coefficient tables");
    int mo_d = 1, mo_K = 1;
    std::string mo_nmax = "100000", mo_config, mo_out;
    moll->add_option("--d", mo_d, "dimension");
    moll->add_option("--K", mo_K, "truncation");
    moll->add_option("--nmax", mo_nmax, "table length");
    moll->add_option("--config", mo_config, "kappa config; with d=1 the combined coefficients are emitted");
    moll->add_option("--out", mo_out, "CSV of n, coefficient (needs --config)");

    // em-check
    auto* em = app.add_subcommand("em-check", "compare a divisor-type partial sum with its leading term");
    int em_k = 1;
    std::string em_kvec, em_z = "1e6";
    em->add_option("--k", em_k, "d_k index");
    em->add_option("--kvec", em_kvec, "Lambda_j powers k_1,k_2,...");
    em->add_option("--z", em_z, "summation limit");

    // kappa-eval
    auto* keval = app.add_subcommand("kappa-eval", "main-term constant c and kappa for a config");
    std::string ke_config, ke_out;
    bool ke_check = false, ke_diag = false;
    keval->add_option("--config", ke_config, "config JSON")->required();
    keval->add_option("--out", ke_out, "write the report here instead of stdout");
    keval->add_flag("--check-quadrature", ke_check, "re-evaluate at twice the quadrature order");
    keval->add_flag("--a-diagnostics", ke_diag, "count A-derivative tagged terms");

    // kappa-optimize
    auto* kopt = app.add_subcommand("kappa-optimize", "maximize kappa over selected coefficients");
    std::string ko_config, ko_free, ko_out, ko_trace;
    int ko_budget = 500, ko_restarts = 4;
    std::uint64_t ko_seed = 1;
    kopt->add_option("--config", ko_config, "starting config JSON")->required();
    kopt->add_option("--free", ko_free, "P1:1-4,P2:*,Q:*,R")->required();
    kopt->add_option("--budget", ko_budget, "kappa evaluations over all restarts");
    kopt->add_option("--restarts", ko_restarts, "Nelder-Mead restarts");
    kopt->add_option("--seed", ko_seed, "restart perturbation seed");
    kopt->add_option("--out", ko_out, "best config JSON");
    kopt->add_option("--trace", ko_trace, "trace CSV (default <out>.trace.csv)");

    // kappa-profile
    auto* kprof = app.add_subcommand("kappa-profile", "kappa along one coordinate");
    std::string kp_config, kp_param, kp_grid, kp_csv;
    kprof->add_option("--config", kp_config, "config JSON")->required();
    kprof->add_option("--param", kp_param, "R, theta, or a coefficient label like P1:2")->required();
    kprof->add_option("--grid", kp_grid, "a:b:n or a comma list")->required();
    kprof->add_option("--csv", kp_csv, "CSV output file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    auto record = [&](CLI::App* sub) {
        man.subcommand = sub->get_name();
        man.flags["threads"] = threads;
        for (const CLI::Option* opt : sub->get_options()) {
            if (opt->get_name() == "--help" || opt->count() == 0)
                continue;
            const auto res = opt->results();
            man.flags[opt->get_name()] = res.size() == 1 ? json(res[0]) : json(res);
        }
    };

    try {
        std::ostringstream out;
        out.precision(17);

        if (*sieve) {
            record(sieve);
            const ConvolutionSpec spec = ConvolutionSpec::parse(sieve_spec);
            const std::size_t n = parse_count(sieve_nmax);
            if (n < 1)
                throw ConfigError("nmax must be >= 1");
            std::optional<std::filesystem::path> dir;
            if (!sieve_out.empty()) {
                std::filesystem::create_directories(sieve_out);
                dir = sieve_out;
            }
            const FnTable t = convolution_table_cached(spec, n, dir);
            KahanSum s;
            for (double v : t.values)
                s.add(v);
            out << "spec " << spec.label() << "\n";
            out << "nmax " << n << "\n";
            out << "sum " << fmt_long_double(s.value()) << "\n";
            if (dir) {
                const auto p = cache_path(*dir, spec, n);
                out << "cache " << p.string() << "\n";
                man.out = p.string();
            }
        } else if (*bell) {
            record(bell);
            if (bell_diagrams) {
                if (bell_d < 1 || bell_K < 0)
                    throw DomainError("--diagrams needs d >= 1 and K >= 0");
                out << bell_diagram_count(bell_d, bell_K).get_str() << "\n";
                if (bell_poly)
                    out << bell_diagram_poly(bell_d, bell_K).to_string() << "\n";
            } else {
                if (bell_n < 0)
                    throw CLI::ValidationError("--n", "bell needs --n (or --diagrams)");
                const BellPoly p = bell_k < 0 ? complete_bell(bell_n) : partial_bell(bell_n, bell_k);
                out << p.to_string() << "\n";
            }
        } else if (*expand) {
            record(expand);
            const RatioExpansion e = expand_integrand(ex_d, parse_int_list(ex_l), parse_int_list(ex_lbar), ex_A);
            out << (ex_format == "json" ? e.to_json() + "\n" : e.to_text());
        } else if (*psum) {
            record(psum);
            const std::uint64_t cutoff = parse_count(ps_cutoff);
            const PrimeSumResult r = a_derivative_closed_form(family_from_string(ps_family),
                                                              level_from_string(ps_level),
                                                              parse_int_list(ps_index), ps_x, cutoff, threads);
            out << "value " << fmt_long_double(r.value) << "\n";
            out << "cutoff " << r.cutoff << "\n";
            out << "tail " << fmt_double(r.tail_estimate) << "\n";
        } else if (*cmp) {
            record(cmp);
            const auto rows = partial_sum_compare(ConvolutionSpec::parse(cmp_spec), cmp_xmax);
            std::ostringstream csv;
            csv << "x,unrestricted,restricted,difference\n";
            for (const auto& r : rows)
                csv << r.x << "," << fmt_double(r.unrestricted) << "," << fmt_double(r.restricted) << ","
                    << fmt_double(r.difference) << "\n";
            if (cmp_csv.empty()) {
                out << csv.str();
            } else {
                write_file(cmp_csv, csv.str());
                man.out = cmp_csv;
            }
        } else if (*moll) {
            record(moll);
            const std::size_t n = parse_count(mo_nmax);
            if (mo_config.empty()) {
                MollifierSpec spec;
                spec.d = mo_d;
                spec.K = mo_K;
                for (const auto& piece : mollifier_coeff_tables(spec, n)) {
                    KahanSum s;
                    for (double v : piece.table.values)
                        s.add(v);
                    out << "ell [";
                    for (std::size_t i = 0; i < piece.ell.size(); ++i)
                        out << (i ? "," : "") << piece.ell[i];
                    out << "] sign " << piece.sign << " multinomial " << piece.multinomial.get_str()
                        << " logpower " << piece.log_power << " sum " << fmt_long_double(s.value()) << "\n";
                }
            } else {
                const KappaConfig cfg = KappaConfig::load(mo_config);
                man.config_digest = hex64(cfg.digest());
                if (cfg.d != 1)
                    throw DomainError("mollify --config supports d = 1 configs");
                std::map<int, PolySpec> polys;
                for (const auto& p : cfg.pieces)
                    polys[p.ell[0]] = p.poly;
                FnTable b = feng_coeffs(cfg.K, n, polys, static_cast<double>(n));
                // the base piece mu(n) P(log(N/n)/log N), N = nmax
                if (polys.count(0) != 0) {
                    const Poly P = polys.at(0).monomial();
                    const FnTable mu = mobius_sieve(n);
                    const double logN = std::log(static_cast<double>(n));
                    for (std::size_t m = 1; m <= n; ++m)
                        if (mu[m] != 0.0)
                            b[m] += mu[m] * P(std::log(static_cast<double>(n) / static_cast<double>(m)) / logN);
                }
                std::ostringstream csv;
                csv << "n,coefficient\n";
                for (std::size_t m = 1; m <= n; ++m)
                    if (b[m] != 0.0)
                        csv << m << "," << fmt_double(b[m]) << "\n";
                if (mo_out.empty()) {
                    out << csv.str();
                } else {
                    write_file(mo_out, csv.str());
                    man.out = mo_out;
                }
            }
        } else if (*em) {
            record(em);
            const double z = parse_real(em_z);
            const auto r = euler_maclaurin_sum(em_k, parse_int_list(em_kvec), z, EMForm::Counting);
            out << "K " << r.K << "\n";
            out << "exact " << fmt_double(r.exact) << "\n";
            out << "leading " << fmt_double(r.leading) << "\n";
            out << "ratio " << fmt_double(r.exact / r.leading) << "\n";
        } else if (*keval) {
            record(keval);
            const KappaConfig cfg = KappaConfig::load(ke_config);
            man.config_digest = hex64(cfg.digest());
            MainTermOptions opt;
            opt.threads = threads;
            opt.check_quadrature = ke_check;
            opt.a_diagnostics = ke_diag;
            const MainTermValue v = assemble_main_term(cfg, opt);
            out << "c " << fmt_double(v.c) << "\n";
            out << "kappa " << fmt_double(v.kappa) << "\n";
            out << "monomials " << v.monomials << "\n";
            out << "groups " << v.groups << "\n";
            if (ke_check)
                out << "quad_delta " << fmt_double(v.quad_delta) << "\n";
            if (ke_diag)
                out << "dropped_a_terms " << v.dropped_a_terms << "\n";
            if (v.precision_warning)
                out << "warning quadrature not converged\n";
            out << "term contribution\n";
            for (const auto& t : v.breakdown)
                out << t.id << " " << fmt_double(t.contribution) << "\n";
            if (!ke_out.empty()) {
                write_file(ke_out, out.str());
                man.out = ke_out;
                out.str("");
            }
        } else if (*kopt) {
            record(kopt);
            OptimizationProblem pb;
            pb.base = KappaConfig::load(ko_config);
            man.config_digest = hex64(pb.base.digest());
            pb.free = parse_free_spec(ko_free, pb.base);
            pb.budget = ko_budget;
            pb.restarts = ko_restarts;
            pb.seed = ko_seed;
            pb.threads = threads;
            const OptimizationResult r = optimize_kappa(pb);
            out << "start_kappa " << fmt_double(r.start_kappa) << "\n";
            out << "best_kappa " << fmt_double(r.best_kappa) << "\n";
            out << "evaluations " << r.trace.size() << "\n";
            out << "budget_exhausted " << (r.budget_exhausted ? "yes" : "no") << "\n";
            for (const auto& p : pb.free)
                out << p.label() << " " << fmt_double(get_param(r.best, p)) << "\n";
            std::string trace_path = ko_trace;
            if (trace_path.empty() && !ko_out.empty())
                trace_path = ko_out + ".trace.csv";
            if (!ko_out.empty()) {
                write_file(ko_out, r.best.to_json() + "\n");
                man.out = ko_out;
            }
            if (!trace_path.empty())
                write_file(trace_path, trace_csv(r, pb.free));
        } else if (*kprof) {
            record(kprof);
            const KappaConfig cfg = KappaConfig::load(kp_config);
            man.config_digest = hex64(cfg.digest());
            const auto rows = evaluate_profile(cfg, kp_param, parse_grid(kp_grid), threads);
            std::ostringstream csv;
            csv << kp_param << ",kappa\n";
            for (const auto& [x, k] : rows)
                csv << fmt_double(x) << "," << fmt_double(k) << "\n";
            if (kp_csv.empty()) {
                out << csv.str();
            } else {
                write_file(kp_csv, csv.str());
                man.out = kp_csv;
            }
        }

        std::cout << out.str() << std::flush;
        emit_manifest(man);
        return 0;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: malformed argument (" << e.what() << ")\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: argument out of range (" << e.what() << ")\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
