// padelab: command-line front end for the experiment runner.
//
// Exit codes: 0 success, 1 assertion failure, 2 configuration error,
// 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "padelab/errors.hpp"
#include "padelab/experiment.hpp"

using namespace padelab;
using nlohmann::json;

namespace {

constexpr int kExitAssert = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Globals {
    std::string config;
    bool check = false;
    bool json = false;
    int workers = 1;
    std::optional<std::string> cache;
    std::optional<std::string> out;
};

struct SpecSource {
    std::string preset;
    std::string spec_text;
};

TestFunctionSpec preset_spec(const std::string& name)
{
    if (name == "onecut")
        return algebraic_spec("2", "3");
    if (name == "twocut")
        return product_spec({{{"-2", "-1"}, {"2", "3"}}, {{"1", "2"}, {"2", "3"}}});
    if (name == "pole3")
        return rational_spec({{"1"}, {"-3", "1"}});
    if (name == "geometric")
        return rational_spec({{"1"}, {"-1/2", "1"}});
    throw ConfigError("unknown preset '" + name + "' (onecut, twocut, pole3, geometric)");
}

TestFunctionSpec resolve_spec(const Globals& g, const SpecSource& s)
{
    if (!s.preset.empty())
        return preset_spec(s.preset);
    if (!s.spec_text.empty()) {
        std::string text = s.spec_text;
        std::replace(text.begin(), text.end(), ';', '\n');
        return *parse_config(text).spec;
    }
    if (!g.config.empty())
        return *load_config(g.config).spec;
    throw ConfigError("no test function: use --preset, --spec or --config");
}

IntervalSystem resolve_intervals(const Globals& g, const SpecSource& s, const std::vector<std::string>& intervals)
{
    if (!intervals.empty()) {
        std::vector<double> e;
        for (const auto& x : intervals)
            e.push_back(BigReal::parse(x, 128).to_double());
        try {
            return IntervalSystem(std::move(e));
        } catch (const DomainError& ex) {
            throw ConfigError(std::string("intervals: ") + ex.what());
        }
    }
    return stahl_compact(resolve_spec(g, s));
}

std::string show(const BigReal& x, int digits)
{
    char* raw = nullptr;
    if (mpfr_asprintf(&raw, "%.*Rg", digits, x.get()) < 0)
        return x.to_string(digits);
    std::string s(raw);
    mpfr_free_str(raw);
    return s;
}

// Imaginary parts below the root certificate level are rounding noise.
BigComplex tidy_root(const BigComplex& z)
{
    const Precision p = z.precision();
    const double scale = std::max(1.0, abs(z).to_double());
    if (abs(z.im()).to_double() > std::ldexp(scale, -static_cast<int>(p) / 4))
        return z;
    return BigComplex(z.re(), BigReal(0L, p));
}

std::string show(const BigComplex& z, int digits)
{
    if (z.im().is_zero())
        return show(z.re(), digits);
    const bool neg = z.im().sign() < 0;
    return show(z.re(), digits) + (neg ? "-" : "+") + show(abs(z.im()), digits) + "i";
}

std::string format_coeff(const BigComplex& c, int digits)
{
    if (c.im().is_zero())
        return show(c.re(), digits);
    return "(" + show(c, digits) + ")";
}

// Descending-power rendering, e.g. "z^2 - 0.5 z + 1".
std::string format_poly(const std::vector<BigComplex>& c, int digits)
{
    std::string out;
    for (std::size_t k = c.size(); k-- > 0;) {
        if (c[k].is_zero())
            continue;
        std::string coeff = format_coeff(c[k], digits);
        bool negative = false;
        if (c[k].im().is_zero() && c[k].re().sign() < 0) {
            negative = true;
            coeff = show(-c[k].re(), digits);
        }
        const std::string power = k == 0 ? "" : (k == 1 ? "z" : "z^" + std::to_string(k));
        std::string term;
        if (k > 0 && coeff == "1")
            term = power;
        else
            term = coeff + (power.empty() ? "" : " " + power);
        if (out.empty())
            out = (negative ? "-" : "") + term;
        else
            out += (negative ? " - " : " + ") + term;
    }
    return out.empty() ? "0" : out;
}

json complex_array(const std::vector<BigComplex>& v, int digits)
{
    json a = json::array();
    for (const auto& c : v)
        a.push_back({c.re().to_string(digits), c.im().to_string(digits)});
    return a;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Padé approximation laboratory: germs, Padé pairs, potential theory and limit-law sweeps"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Experiment config file");
    app.add_flag("--assert", g.check, "Check the config's acceptance thresholds; exit 1 on failure");
    app.add_flag("--json", g.json, "Machine-readable output");
    app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--cache", g.cache, "Cache directory (empty string disables)");
    app.add_option("--out", g.out, "Output directory");

    SpecSource src;
    auto spec_opts = [&](CLI::App* sub) {
        sub->add_option("--preset", src.preset, "onecut, twocut, pole3 or geometric");
        sub->add_option("--spec", src.spec_text, "Spec lines in config syntax, separated by ';'");
    };
    Precision precision = kDefaultPrecision;
    int digits = 20;

    auto* germ_cmd = app.add_subcommand("germ", "Print germ coefficients at infinity");
    spec_opts(germ_cmd);
    int order = 16;
    germ_cmd->add_option("--order", order, "Highest coefficient index")->check(CLI::Range(2, 4096));
    germ_cmd->add_option("--precision", precision, "Working precision in bits");
    germ_cmd->add_option("--digits", digits, "Printed significant digits");

    auto* pade_cmd = app.add_subcommand("pade", "Compute one diagonal Padé pair");
    spec_opts(pade_cmd);
    int n = 1;
    int pade_order = 0;
    bool show_roots = false;
    pade_cmd->add_option("--n", n, "Order n")->check(CLI::Range(0, 512));
    pade_cmd->add_option("--order", pade_order, "Germ order (default 2n + 8)");
    pade_cmd->add_option("--precision", precision, "Working precision in bits");
    pade_cmd->add_option("--digits", digits, "Printed significant digits");
    pade_cmd->add_flag("--roots", show_roots, "Also print the zeros of Q");

    std::vector<std::string> intervals;
    int nodes = 128;
    auto* eq_cmd = app.add_subcommand("equilibrium", "Equilibrium measure, capacity and Robin constant");
    spec_opts(eq_cmd);
    eq_cmd->add_option("--intervals", intervals, "Endpoints a1 a2 ... a2p")->delimiter(',');
    eq_cmd->add_option("--K", nodes, "Quadrature nodes per interval");

    auto* green_cmd = app.add_subcommand("green", "Green function with pole at infinity");
    spec_opts(green_cmd);
    std::vector<std::string> points;
    green_cmd->add_option("--intervals", intervals, "Endpoints a1 a2 ... a2p")->delimiter(',');
    green_cmd->add_option("--z", points, "Evaluation points (a, a+bi)")->required();
    green_cmd->add_option("--K", nodes, "Quadrature nodes per interval");

    auto* verify_cmd = app.add_subcommand("verify", "Full sweep from --config, with reports and plot data");

    auto* oracle_cmd = app.add_subcommand("oracle", "Discrete energy minimization cross-check");
    spec_opts(oracle_cmd);
    int grid = 2000;
    oracle_cmd->add_option("--intervals", intervals, "Endpoints a1 a2 ... a2p")->delimiter(',');
    oracle_cmd->add_option("--M", grid, "Grid cells")->check(CLI::Range(100, 100000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (germ_cmd->parsed()) {
            const Germ germ = germ_at_infinity(resolve_spec(g, src), order, precision);
            if (g.json) {
                std::cout << json{{"precision_bits", precision}, {"coeffs", complex_array({germ.coeffs().begin(), germ.coeffs().end()}, digits)}}
                                 .dump(2)
                          << "\n";
            } else {
                for (int k = 0; k <= germ.order(); ++k)
                    std::cout << "c_" << k << " = " << show(germ[k], digits) << "\n";
            }
            return 0;
        }
        if (pade_cmd->parsed()) {
            const TestFunctionSpec spec = resolve_spec(g, src);
            const int N = pade_order > 0 ? pade_order : 2 * n + 8;
            const Germ germ = germ_at_infinity(spec, N, precision);
            const PadePair p =
                pade_pair_escalating([&](Precision prec) { return germ_at_infinity(spec, N, prec); }, n, precision);
            const int ro = residual_order(germ_at_infinity(spec, N, p.precision), p);
            std::optional<ZeroMultiset> z;
            if (show_roots && p.k_n > 0)
                z = roots(p.q);
            if (g.json) {
                json j = pair_to_json(p);
                j["residual_order"] = ro == kFullTail ? json("full") : json(ro);
                if (z) {
                    j["zeros"] = json::array();
                    for (const auto& r : z->roots)
                        j["zeros"].push_back({{"re", r.location.re().to_string(digits)},
                                              {"im", r.location.im().to_string(digits)},
                                              {"multiplicity", r.multiplicity}});
                }
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << "n = " << p.n << ", k_n = " << p.k_n << ", unique = " << (p.unique ? "yes" : "no")
                          << ", precision = " << p.precision << " bits\n";
                std::cout << "Q = " << format_poly(p.q, digits) << "\n";
                std::cout << "P = " << format_poly(p.p, digits) << "\n";
                std::cout << "residual order = " << (ro == kFullTail ? std::string("full tail") : std::to_string(ro)) << "\n";
                if (z)
                    for (const auto& r : z->roots)
                        std::cout << "zero " << show(tidy_root(r.location), digits) << " (multiplicity " << r.multiplicity
                                  << ")\n";
            }
            return 0;
        }
        if (eq_cmd->parsed()) {
            const auto eq = solve_equilibrium(resolve_intervals(g, src, intervals), nodes);
            if (g.json) {
                std::cout << equilibrium_json(eq).dump(2) << "\n";
            } else {
                std::cout.precision(15);
                std::cout << "capacity = " << eq.capacity() << "\nrobin constant = " << eq.gamma()
                          << "\nfrostman deviation = " << eq.frostman_deviation() << "\nmasses =";
                for (double m : eq.masses())
                    std::cout << " " << m;
                std::cout << "\n";
            }
            return 0;
        }
        if (green_cmd->parsed()) {
            const auto eq = solve_equilibrium(resolve_intervals(g, src, intervals), nodes);
            json arr = json::array();
            std::cout.precision(15);
            for (const auto& p : points) {
                cplx z;
                try {
                    z = BigComplex::parse(p, 128).to_complex();
                } catch (const DomainError&) {
                    throw ConfigError("bad point '" + p + "'");
                }
                const double v = green(eq, z);
                if (g.json)
                    arr.push_back({{"z", p}, {"green", v}});
                else
                    std::cout << "g(" << p << ") = " << v << "\n";
            }
            if (g.json)
                std::cout << arr.dump(2) << "\n";
            return 0;
        }
        if (oracle_cmd->parsed()) {
            const IntervalSystem s = resolve_intervals(g, src, intervals);
            const auto o = energy_oracle(s, grid);
            const auto eq = solve_equilibrium(s);
            if (g.json) {
                std::cout << json{{"M", grid},
                                  {"gamma_hat", o.gamma_hat},
                                  {"capacity_hat", std::exp(-o.gamma_hat)},
                                  {"capacity", eq.capacity()},
                                  {"masses", o.masses},
                                  {"iterations", o.iterations},
                                  {"converged", o.converged}}
                                 .dump(2)
                          << "\n";
            } else {
                std::cout.precision(10);
                std::cout << "oracle capacity = " << std::exp(-o.gamma_hat) << " (analytic " << eq.capacity() << ")\n"
                          << "oracle robin constant = " << o.gamma_hat << " (analytic " << eq.gamma() << ")\n"
                          << "iterations = " << o.iterations << (o.converged ? "" : " (not converged)") << "\nmasses =";
                for (double m : o.masses)
                    std::cout << " " << m;
                std::cout << "\n";
            }
            return 0;
        }
        if (verify_cmd->parsed()) {
            if (g.config.empty())
                throw ConfigError("verify needs --config");
            const ExperimentConfig cfg = load_config(g.config);
            RunOptions ro;
            ro.workers = g.workers;
            ro.check = g.check;
            if (g.out)
                ro.output = *g.out;
            if (g.cache)
                ro.cache = *g.cache;
            const ExperimentResult res = run_experiment(cfg, ro);
            if (g.json) {
                json j{{"output", res.output.string()}, {"failures", res.failures}, {"warnings", res.report.warnings}};
                j["checks"] = json::array();
                for (const auto& c : res.checks)
                    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << "rows: " << res.report.rows.size() << ", output: " << res.output.string()
                          << ", cache hits: " << res.cache_hits << "\n";
                for (const auto& w : res.report.warnings)
                    std::cout << "warning: " << w << "\n";
                for (const auto& f : res.failures)
                    std::cout << "failed: " << f << "\n";
                for (const auto& c : res.checks)
                    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
            }
            if (!res.failures.empty())
                return kExitNumerical;
            if (g.check && !res.passed())
                return kExitAssert;
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
