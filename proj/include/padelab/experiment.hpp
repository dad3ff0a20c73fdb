#pragma once

// Experiment configuration, germ/pair cache and the sweep runner.
//
// Config files are line-oriented `key = value` text; `#` starts a comment.
// Values are atoms (numbers kept as decimal or p/q text, complex numbers as
// a+bi, plain words), lists `[v, v, ...]` or records `{k=v, ...}`:
//
//     segments = [[-1, 1]]
//     factors  = [{seg=0, C=2, exp=1/2}, {seg=0, C=3, exp=1/2}]
//     rational = {num=[1], den=[-3, 1]}
//     precision = 512
//     n_min = 5
//     n_max = 60
//     rhos = [1.2, 1.5, 2]

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "padelab/pade.hpp"
#include "padelab/potential.hpp"
#include "padelab/testfn.hpp"
#include "padelab/verify.hpp"

namespace padelab {

// Generic parsed config value.
struct ConfigValue {
    enum class Kind { atom, list, record };
    Kind kind = Kind::atom;
    std::string atom;
    std::vector<ConfigValue> items;
    std::vector<std::pair<std::string, ConfigValue>> fields;

    std::string text() const; // canonical rendering
};

// Throws ConfigError on malformed text.
ConfigValue parse_config_value(const std::string& text);

// Builds a spec from `segments`, `factors` and `rational` values (any may be
// absent). Throws ConfigError (without a line) on invalid content.
TestFunctionSpec spec_from_values(const ConfigValue* segments, const ConfigValue* factors, const ConfigValue* rational);

struct ExperimentConfig {
    std::optional<TestFunctionSpec> spec;
    Precision precision = 512;
    int n_min = 1;
    int n_max = 20;
    int n_step = 1;
    int germ_order = 0; // 0: 2 n_max + 8
    std::vector<std::string> rhos{"1.2", "1.5", "2"};
    std::vector<std::string> probes; // empty: default probe set
    int quadrature_nodes = 128;      // K
    int oracle_grid = 0;             // M; 0 skips the energy oracle
    int curve_points = 128;
    int window = 5;
    std::string near_radius = "0.05";
    std::string froissart_tol = "1e-6";
    std::uint64_t seed = 1;
    std::filesystem::path output = "out";
    std::filesystem::path cache = "cache";

    // Assertion profile.
    std::vector<std::string> checks; // empty: default for the spec
    std::string relax = "1";
    int late_lo = 50, late_hi = 60;
    int early_lo = 10, early_hi = 20;
    int pot_final_n = 60, pot_ref_n = 20;
    int near_n = 40;
    std::vector<std::string> gap_probes;

    int effective_germ_order() const { return germ_order > 0 ? germ_order : 2 * n_max + 8; }
    std::vector<double> rho_values() const;
    std::vector<cplx> probe_values() const;
    std::vector<std::string> effective_checks() const;
    LimitLawThresholds thresholds() const;

    // Every semantically relevant field; output and cache paths excluded.
    std::string canonical() const;
    std::string hash() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Cache of germs and pairs as JSON with full-precision decimal strings.
class ResultCache {
public:
    explicit ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {}
    bool enabled() const { return !dir_.empty(); }

    std::optional<Germ> load_germ(const std::string& key) const;
    void store_germ(const std::string& key, const Germ& g) const;
    std::optional<PadePair> load_pair(const std::string& key) const;
    void store_pair(const std::string& key, const PadePair& p) const;

private:
    std::filesystem::path dir_;
};

nlohmann::json germ_to_json(const Germ& g);
Germ germ_from_json(const nlohmann::json& j);
nlohmann::json pair_to_json(const PadePair& p);
PadePair pair_from_json(const nlohmann::json& j);

nlohmann::json equilibrium_json(const EquilibriumData& eq);

struct RunOptions {
    int workers = 1;
    bool check = false;
    std::optional<std::filesystem::path> output; // overrides the config
    std::optional<std::filesystem::path> cache;  // overrides; empty path disables
};

struct ExperimentResult {
    ConvergenceReport report;
    std::vector<CheckResult> checks;
    std::vector<std::string> failures; // per-n errors, partial results kept
    int cache_hits = 0;
    std::filesystem::path output;
    bool passed() const;
};

// Writes report.csv, report.json, equilibrium.json (when S is nonempty),
// plots/*.dat and MANIFEST into the output directory.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& opt = {});

// Checks for a spec without branch cuts: full-tail residual order, vanishing
// error at the probes and no doublets.
std::vector<CheckResult> check_exact_reproduction(const ConvergenceReport& report, const std::vector<int>& residual_orders);

} // namespace padelab
