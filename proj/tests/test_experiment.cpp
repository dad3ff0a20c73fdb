#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "padelab/errors.hpp"
#include "padelab/experiment.hpp"

using namespace padelab;
namespace fs = std::filesystem;

namespace {

const char* kPole = R"(# comment line
rational = {num=[1], den=[-3, 1]}   # trailing comment
precision = 256
n_min = 1
n_max = 8
)";

int error_line(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("padelab-test-" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("config values")
{
    const auto v = parse_config_value("[{seg=0, C=2, exp=1/2}, [1, -2.5], 1+1i]");
    REQUIRE(v.kind == ConfigValue::Kind::list);
    REQUIRE(v.items.size() == 3);
    CHECK(v.items[0].kind == ConfigValue::Kind::record);
    CHECK(v.items[2].atom == "1+1i");
    CHECK(v.text() == "[{seg=0,C=2,exp=1/2},[1,-2.5],1+1i]");
    CHECK_THROWS_AS(parse_config_value("[1, 2"), ConfigError);
    CHECK_THROWS_AS(parse_config_value("{a 1}"), ConfigError);
}

TEST_CASE("config parsing and validation")
{
    const auto cfg = parse_config(kPole);
    REQUIRE(cfg.spec);
    CHECK(cfg.spec->factors().empty());
    CHECK(cfg.precision == 256);
    CHECK(cfg.effective_germ_order() == 24);
    CHECK(cfg.effective_checks() == std::vector<std::string>{"exact"});

    const auto one = parse_config("segments = [[-1,1]]\nfactors = [{C=2, exp=1/2}, {C=3, exp=1/2}]\n");
    REQUIRE(one.spec);
    CHECK(one.spec->hash() == algebraic_spec("2", "3").hash());
    CHECK(one.rho_values() == std::vector<double>{1.2, 1.5, 2.0});

    CHECK(error_line("rational = {num=[1], den=[-3, 1]}\nthis is not a pair\n") == 2);
    CHECK(error_line("rational = {num=[1], den=[-3, 1]}\n\nbogus = 3\n") == 3);
    CHECK(error_line("rational = {num=[1], den=[-3, 1]}\nn_max = 4\nn_max = 5\n") == 3);
    CHECK(error_line("rational = {num=[1], den=[-3, 1]}\nn_max = 600\n") == 2);
    CHECK(error_line("rational = {num=[1], den=[-3, 1]}\nrhos = [1.5, 1]\n") == 2);
    CHECK(error_line("rational = {num=[1], den=[-3, 1]}\nn_min = x\n") == 2);
    CHECK(error_line("segments = [[-1,1]]\nfactors = [{C=0.5, exp=1/2}]\n") == 2);
    CHECK(error_line("precision = 512\n") == 0);
    CHECK(error_line("rational = {num=[1], den=[-3, 1]\n") == 1);
}

TEST_CASE("config hash covers semantic fields only")
{
    const auto base = parse_config(kPole);
    const std::string h = base.hash();
    for (const char* extra : {"rhos = [1.3]", "K = 64", "window = 3", "seed = 7", "relax = 1.5", "germ_order = 30",
                              "froissart_tol = 1e-8", "probes = [4]"}) {
        const auto other = parse_config(std::string(kPole) + extra + "\n");
        CHECK_MESSAGE(other.hash() != h, extra);
    }
    CHECK(parse_config(std::string(kPole) + "output = elsewhere\ncache = other\n").hash() == h);
    std::string changed = kPole;
    changed.replace(changed.find("n_max = 8"), 9, "n_max = 9");
    CHECK(parse_config(changed).hash() != h);
}

TEST_CASE("germ and pair serialization round trips exactly")
{
    const auto spec = algebraic_spec("2", "3");
    const Germ g = germ_at_infinity(spec, 30, 512);
    const Germ g2 = germ_from_json(nlohmann::json::parse(germ_to_json(g).dump()));
    CHECK(germ_hash(g2) == germ_hash(g));
    for (int k = 0; k <= g.order(); ++k) {
        CHECK(g2[k].re() == g[k].re());
        CHECK(g2[k].im() == g[k].im());
    }
    const PadePair p = pade_pair(g, 12);
    const PadePair p2 = pair_from_json(nlohmann::json::parse(pair_to_json(p).dump()));
    CHECK(p2.k_n == p.k_n);
    CHECK(p2.germ_hash == p.germ_hash);
    for (std::size_t i = 0; i < p.q.size(); ++i)
        CHECK(p2.q[i].re() == p.q[i].re());
    for (std::size_t i = 0; i < p.p.size(); ++i)
        CHECK(p2.p[i].re() == p.p[i].re());
}

TEST_CASE("experiment runs are deterministic and cache-consistent")
{
    const fs::path dir = scratch("run");
    auto cfg = parse_config(kPole);
    RunOptions opt;
    opt.check = true;
    opt.cache = dir / "cache";
    opt.output = dir / "a";
    const auto a = run_experiment(cfg, opt);
    CHECK(a.passed());
    CHECK(a.cache_hits == 0);
    REQUIRE(a.report.rows.size() == 8);
    for (const auto& r : a.report.rows)
        CHECK(r.max_abs_error < 1e-60);

    opt.output = dir / "b";
    const auto b = run_experiment(cfg, opt);
    CHECK(b.cache_hits == 9);
    opt.output = dir / "c";
    opt.cache = fs::path();
    opt.workers = 3;
    const auto c = run_experiment(cfg, opt);
    CHECK(c.cache_hits == 0);
    for (const char* f : {"report.csv", "report.json", "MANIFEST"}) {
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "c" / f));
    }
    CHECK(fs::exists(dir / "a" / "plots" / "max_abs_error.dat"));
    CHECK_FALSE(fs::exists(dir / "a" / "equilibrium.json"));

    // A corrupted cache entry is recomputed, not trusted.
    opt.cache = dir / "cache";
    for (const auto& e : fs::directory_iterator(dir / "cache"))
        if (e.path().filename().string().rfind("pair-", 0) == 0) {
            std::ofstream(e.path()) << "{not json";
            break;
        }
    opt.output = dir / "d";
    const auto d = run_experiment(cfg, opt);
    CHECK(d.cache_hits == 8);
    CHECK(slurp(dir / "a" / "report.csv") == slurp(dir / "d" / "report.csv"));
    fs::remove_all(dir);
}

TEST_CASE("experiment on a branch-cut function writes equilibrium data")
{
    const fs::path dir = scratch("eq");
    auto cfg = parse_config("segments = [[-1,1]]\nfactors = [{C=2, exp=1/2}, {C=3, exp=1/2}]\nprecision = 256\n"
                            "n_min = 4\nn_max = 12\ncurve_points = 32\nM = 200\nlate_window = [10, 12]\n"
                            "early_window = [4, 6]\npot_n = [12, 6]\nnear_n = 12\nchecks = [degree, sup_s, zeros]\n");
    RunOptions opt;
    opt.check = true;
    opt.cache = fs::path();
    opt.output = dir;
    const auto r = run_experiment(cfg, opt);
    CHECK(r.failures.empty());
    CHECK(r.checks.size() == 3);
    const auto eq = nlohmann::json::parse(slurp(dir / "equilibrium.json"));
    CHECK(eq["capacity"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eq["oracle"]["capacity_hat"].get<double>() == doctest::Approx(0.5).epsilon(1e-2));
    const auto rep = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(rep["rows"].size() == 9);
    CHECK(rep["config_hash"] == cfg.hash());
    fs::remove_all(dir);
}
