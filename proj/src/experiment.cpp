#include "padelab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "padelab/errors.hpp"
#include "padelab/hash.hpp"

namespace padelab {

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

class ValueParser {
public:
    explicit ValueParser(std::string_view s) : s_(s) {}

    ConfigValue parse()
    {
        ConfigValue v = value();
        skip();
        if (pos_ != s_.size())
            fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ConfigError(msg + " at column " + std::to_string(pos_ + 1));
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool eat(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string atom()
    {
        skip();
        const std::size_t b = pos_;
        while (pos_ < s_.size() && std::string_view("[]{},=").find(s_[pos_]) == std::string_view::npos)
            ++pos_;
        std::string a = trim(s_.substr(b, pos_ - b));
        if (a.empty())
            fail("expected a value");
        return a;
    }

    ConfigValue value()
    {
        ConfigValue v;
        if (eat('[')) {
            v.kind = ConfigValue::Kind::list;
            if (eat(']'))
                return v;
            do
                v.items.push_back(value());
            while (eat(','));
            if (!eat(']'))
                fail("expected ']'");
        } else if (eat('{')) {
            v.kind = ConfigValue::Kind::record;
            if (eat('}'))
                return v;
            do {
                std::string key = atom();
                if (!eat('='))
                    fail("expected '=' after '" + key + "'");
                v.fields.emplace_back(std::move(key), value());
            } while (eat(','));
            if (!eat('}'))
                fail("expected '}'");
        } else {
            v.atom = atom();
        }
        return v;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

const ConfigValue* field(const ConfigValue& rec, const std::string& key)
{
    for (const auto& [k, v] : rec.fields)
        if (k == key)
            return &v;
    return nullptr;
}

const std::string& need_atom(const ConfigValue& v, const std::string& what)
{
    if (v.kind != ConfigValue::Kind::atom)
        throw ConfigError(what + " must be a single value");
    return v.atom;
}

const std::vector<ConfigValue>& need_list(const ConfigValue& v, const std::string& what)
{
    if (v.kind != ConfigValue::Kind::list)
        throw ConfigError(what + " must be a list [...]");
    return v.items;
}

long to_integer(const std::string& s, const std::string& what)
{
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError(what + " must be an integer, got '" + s + "'");
    return v;
}

double to_real(const std::string& s, const std::string& what)
{
    try {
        return BigReal::parse(s, 128).to_double();
    } catch (const DomainError&) {
        throw ConfigError(what + " must be a real number, got '" + s + "'");
    }
}

std::vector<std::string> atoms_of(const ConfigValue& v, const std::string& what)
{
    std::vector<std::string> out;
    for (const auto& item : need_list(v, what))
        out.push_back(need_atom(item, what + " entries"));
    return out;
}

std::string join(const std::vector<std::string>& v)
{
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + v[i];
    return s + "]";
}

} // namespace

std::string ConfigValue::text() const
{
    switch (kind) {
    case Kind::atom:
        return atom;
    case Kind::list: {
        std::string s = "[";
        for (std::size_t i = 0; i < items.size(); ++i)
            s += (i ? "," : "") + items[i].text();
        return s + "]";
    }
    case Kind::record: {
        std::string s = "{";
        for (std::size_t i = 0; i < fields.size(); ++i)
            s += (i ? "," : "") + fields[i].first + "=" + fields[i].second.text();
        return s + "}";
    }
    }
    return {};
}

ConfigValue parse_config_value(const std::string& text) { return ValueParser(text).parse(); }

TestFunctionSpec spec_from_values(const ConfigValue* segments, const ConfigValue* factors, const ConfigValue* rational)
{
    try {
        std::vector<Segment> segs;
        if (segments != nullptr)
            for (const auto& s : need_list(*segments, "segments")) {
                const auto& ends = need_list(s, "segment");
                if (ends.size() != 2)
                    throw ConfigError("a segment needs exactly two endpoints");
                segs.push_back({ExactReal(need_atom(ends[0], "segment endpoint")),
                                ExactReal(need_atom(ends[1], "segment endpoint"))});
            }
        std::vector<FactorSpec> fs;
        for (const auto& s : segs)
            fs.push_back(FactorSpec{s, {}});
        if (factors != nullptr) {
            for (const auto& f : need_list(*factors, "factors")) {
                if (f.kind != ConfigValue::Kind::record)
                    throw ConfigError("factor entries must be records {seg=.., C=.., exp=..}");
                const ConfigValue* c = field(f, "C");
                const ConfigValue* e = field(f, "exp");
                const ConfigValue* sg = field(f, "seg");
                if (c == nullptr || e == nullptr)
                    throw ConfigError("factor entries need C and exp");
                long j = 0;
                if (sg != nullptr)
                    j = to_integer(need_atom(*sg, "seg"), "seg");
                else if (segs.size() != 1)
                    throw ConfigError("factor entry needs seg= when several segments are given");
                if (j < 0 || j >= static_cast<long>(segs.size()))
                    throw ConfigError("factor seg index " + std::to_string(j) + " out of range");
                fs[static_cast<std::size_t>(j)].powers.push_back(
                    {ExactComplex(need_atom(*c, "C")), ExactComplex(need_atom(*e, "exp"))});
            }
        }
        std::optional<RationalMultiplier> rm;
        if (rational != nullptr) {
            if (rational->kind != ConfigValue::Kind::record)
                throw ConfigError("rational must be a record {num=[..], den=[..]}");
            const ConfigValue* num = field(*rational, "num");
            const ConfigValue* den = field(*rational, "den");
            if (num == nullptr || den == nullptr)
                throw ConfigError("rational needs num and den");
            RationalMultiplier r;
            for (const auto& a : atoms_of(*num, "num"))
                r.numerator.emplace_back(a);
            for (const auto& a : atoms_of(*den, "den"))
                r.denominator.emplace_back(a);
            rm = std::move(r);
        }
        return TestFunctionSpec(std::move(fs), std::move(rm));
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

std::vector<double> ExperimentConfig::rho_values() const
{
    std::vector<double> v;
    for (const auto& r : rhos)
        v.push_back(to_real(r, "rho"));
    return v;
}

std::vector<cplx> ExperimentConfig::probe_values() const
{
    std::vector<cplx> v;
    for (const auto& p : probes)
        v.push_back(BigComplex::parse(p, 128).to_complex());
    return v;
}

std::vector<std::string> ExperimentConfig::effective_checks() const
{
    if (!checks.empty())
        return checks;
    if (spec && spec->factors().empty())
        return {"exact"};
    return {"degree", "sup_s", "rho", "gaps", "zeros"};
}

LimitLawThresholds ExperimentConfig::thresholds() const
{
    const double x = to_real(relax, "relax");
    LimitLawThresholds t;
    t.degree_full_fraction = 1.0 - (1.0 - t.degree_full_fraction) * x;
    t.late_lo = late_lo;
    t.late_hi = late_hi;
    t.early_lo = early_lo;
    t.early_hi = early_hi;
    t.sup_s_tol *= x;
    t.rho_tol *= x;
    t.lower_slack *= x;
    t.gap_tol *= x;
    t.gap_probes = gap_probes;
    t.pot_final_n = pot_final_n;
    t.pot_ref_n = pot_ref_n;
    t.pot_final_tol *= x;
    t.pot_ratio *= x;
    t.near_n = near_n;
    t.near_fraction = 1.0 - (1.0 - t.near_fraction) * x;
    const auto c = effective_checks();
    auto has = [&](const char* name) { return std::find(c.begin(), c.end(), name) != c.end(); };
    t.degree = has("degree");
    t.sup_s = has("sup_s");
    t.rho = has("rho");
    t.gaps = has("gaps");
    t.zeros = has("zeros");
    return t;
}

std::string ExperimentConfig::canonical() const
{
    std::ostringstream os;
    os << (spec ? spec->canonical() : std::string("spec = none\n"));
    os << "precision = " << precision << "\nn = [" << n_min << "," << n_max << "," << n_step << "]\n"
       << "germ_order = " << effective_germ_order() << "\nrhos = " << join(rhos) << "\nprobes = " << join(probes)
       << "\nK = " << quadrature_nodes << "\nM = " << oracle_grid << "\ncurve_points = " << curve_points
       << "\nwindow = " << window << "\nnear_radius = " << near_radius << "\nfroissart_tol = " << froissart_tol
       << "\nseed = " << seed << "\nchecks = " << join(effective_checks()) << "\nrelax = " << relax << "\nlate_window = ["
       << late_lo << "," << late_hi << "]\nearly_window = [" << early_lo << "," << early_hi << "]\npot_n = ["
       << pot_final_n << "," << pot_ref_n << "]\nnear_n = " << near_n << "\ngap_probes = " << join(gap_probes) << "\n";
    return os.str();
}

std::string ExperimentConfig::hash() const { return stable_hash(canonical()); }

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig cfg;
    std::map<std::string, std::pair<ConfigValue, int>> entries;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        if (trim(line).empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", lineno);
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty())
            throw ConfigError("missing key", lineno);
        if (entries.count(key))
            throw ConfigError("duplicate key '" + key + "'", lineno);
        try {
            entries.emplace(key, std::make_pair(parse_config_value(line.substr(eq + 1)), lineno));
        } catch (const ConfigError& e) {
            throw ConfigError(key + ": " + e.what(), lineno);
        }
    }

    auto get = [&](const char* key) -> const ConfigValue* {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second.first;
    };
    auto line_of = [&](const char* key) {
        auto it = entries.find(key);
        return it == entries.end() ? 0 : it->second.second;
    };
    std::set<std::string> used;
    auto with = [&](const char* key, auto&& fn) {
        if (const ConfigValue* v = get(key)) {
            used.insert(key);
            try {
                fn(*v);
            } catch (const ConfigError& e) {
                throw ConfigError(std::string(key) + ": " + e.what(), line_of(key));
            }
        }
    };
    auto integer = [&](const char* key, int& out) {
        with(key, [&](const ConfigValue& v) { out = static_cast<int>(to_integer(need_atom(v, key), key)); });
    };
    auto real_text = [&](const char* key, std::string& out) {
        with(key, [&](const ConfigValue& v) {
            out = need_atom(v, key);
            to_real(out, key);
        });
    };
    auto pair_of = [&](const char* key, int& a, int& b) {
        with(key, [&](const ConfigValue& v) {
            const auto items = atoms_of(v, key);
            if (items.size() != 2)
                throw ConfigError("expected two integers");
            a = static_cast<int>(to_integer(items[0], key));
            b = static_cast<int>(to_integer(items[1], key));
        });
    };

    {
        const ConfigValue *s = get("segments"), *f = get("factors"), *r = get("rational");
        used.insert({"segments", "factors", "rational"});
        const int ln = std::max({line_of("segments"), line_of("factors"), line_of("rational")});
        if (s == nullptr && r == nullptr)
            throw ConfigError("config needs segments/factors or a rational multiplier");
        try {
            cfg.spec = spec_from_values(s, f, r);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("spec: ") + e.what(), ln);
        }
    }
    with("precision", [&](const ConfigValue& v) { cfg.precision = to_integer(need_atom(v, "precision"), "precision"); });
    integer("n_min", cfg.n_min);
    integer("n_max", cfg.n_max);
    integer("n_step", cfg.n_step);
    integer("germ_order", cfg.germ_order);
    with("rhos", [&](const ConfigValue& v) {
        cfg.rhos = atoms_of(v, "rhos");
        for (const auto& r : cfg.rhos)
            if (!(to_real(r, "rho") > 1.0))
                throw ConfigError("every rho must exceed 1");
    });
    with("probes", [&](const ConfigValue& v) {
        cfg.probes = atoms_of(v, "probes");
        for (const auto& p : cfg.probes)
            try {
                BigComplex::parse(p, 64);
            } catch (const DomainError&) {
                throw ConfigError("bad probe '" + p + "'");
            }
    });
    integer("K", cfg.quadrature_nodes);
    integer("M", cfg.oracle_grid);
    integer("curve_points", cfg.curve_points);
    integer("window", cfg.window);
    real_text("near_radius", cfg.near_radius);
    real_text("froissart_tol", cfg.froissart_tol);
    with("seed", [&](const ConfigValue& v) { cfg.seed = static_cast<std::uint64_t>(to_integer(need_atom(v, "seed"), "seed")); });
    with("output", [&](const ConfigValue& v) { cfg.output = need_atom(v, "output"); });
    with("cache", [&](const ConfigValue& v) { cfg.cache = need_atom(v, "cache"); });
    with("checks", [&](const ConfigValue& v) {
        cfg.checks = atoms_of(v, "checks");
        static const std::set<std::string> known{"degree", "sup_s", "rho", "gaps", "zeros", "exact"};
        for (const auto& c : cfg.checks)
            if (!known.count(c))
                throw ConfigError("unknown check '" + c + "'");
    });
    real_text("relax", cfg.relax);
    pair_of("late_window", cfg.late_lo, cfg.late_hi);
    pair_of("early_window", cfg.early_lo, cfg.early_hi);
    pair_of("pot_n", cfg.pot_final_n, cfg.pot_ref_n);
    integer("near_n", cfg.near_n);
    with("gap_probes", [&](const ConfigValue& v) { cfg.gap_probes = atoms_of(v, "gap_probes"); });

    for (const auto& [key, entry] : entries)
        if (!used.count(key))
            throw ConfigError("unknown key '" + key + "'", entry.second);

    auto invalid = [&](const char* key, const std::string& msg) { throw ConfigError(msg, line_of(key)); };
    if (cfg.precision < kMinPrecision)
        invalid("precision", "precision must be at least " + std::to_string(kMinPrecision) + " bits");
    if (cfg.n_min < 1)
        invalid("n_min", "n_min must be >= 1");
    if (cfg.n_max > 512)
        invalid("n_max", "n_max must be <= 512");
    if (cfg.n_max < cfg.n_min)
        invalid("n_max", "n_max must be >= n_min");
    if (cfg.n_step < 1)
        invalid("n_step", "n_step must be >= 1");
    if (cfg.germ_order != 0 && cfg.germ_order < 2 * cfg.n_max)
        invalid("germ_order", "germ_order must be at least 2 n_max");
    if (cfg.quadrature_nodes < 32)
        invalid("K", "K must be at least 32");
    if (cfg.oracle_grid != 0 && cfg.oracle_grid < 100)
        invalid("M", "M must be 0 or at least 100");
    if (cfg.curve_points < 8)
        invalid("curve_points", "curve_points must be at least 8");
    if (cfg.window < 1)
        invalid("window", "window must be >= 1");
    if (!(to_real(cfg.near_radius, "near_radius") > 0.0))
        invalid("near_radius", "near_radius must be positive");
    if (!(to_real(cfg.froissart_tol, "froissart_tol") > 0.0))
        invalid("froissart_tol", "froissart_tol must be positive");
    if (!(to_real(cfg.relax, "relax") >= 1.0))
        invalid("relax", "relax must be >= 1");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

nlohmann::json complex_json(const BigComplex& z) { return nlohmann::json::array({z.re().to_string(), z.im().to_string()}); }

BigComplex complex_from(const nlohmann::json& j, Precision prec)
{
    return BigComplex(BigReal::parse(j.at(0).get<std::string>(), prec), BigReal::parse(j.at(1).get<std::string>(), prec));
}

std::optional<nlohmann::json> read_json(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        return std::nullopt;
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
        return std::nullopt; // a damaged entry is recomputed
    }
}

void write_text(const std::filesystem::path& file, const std::string& text)
{
    std::filesystem::create_directories(file.parent_path());
    const auto tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + tmp);
        out << text;
    }
    std::filesystem::rename(tmp, file);
}

} // namespace

nlohmann::json germ_to_json(const Germ& g)
{
    nlohmann::json j{{"precision_bits", g.precision()}, {"order", g.order()}, {"hash", germ_hash(g)}};
    j["coeffs"] = nlohmann::json::array();
    for (const auto& c : g.coeffs())
        j["coeffs"].push_back(complex_json(c));
    return j;
}

Germ germ_from_json(const nlohmann::json& j)
{
    const Precision p = j.at("precision_bits").get<Precision>();
    std::vector<BigComplex> c;
    for (const auto& x : j.at("coeffs"))
        c.push_back(complex_from(x, p));
    return Germ(std::move(c));
}

nlohmann::json pair_to_json(const PadePair& p)
{
    nlohmann::json j{{"n", p.n},
                     {"k_n", p.k_n},
                     {"unique", p.unique},
                     {"precision_bits", p.precision},
                     {"germ_hash", p.germ_hash}};
    j["p_coeffs"] = nlohmann::json::array();
    for (const auto& c : p.p)
        j["p_coeffs"].push_back(complex_json(c));
    j["q_coeffs"] = nlohmann::json::array();
    for (const auto& c : p.q)
        j["q_coeffs"].push_back(complex_json(c));
    return j;
}

PadePair pair_from_json(const nlohmann::json& j)
{
    PadePair p;
    p.n = j.at("n").get<int>();
    p.k_n = j.at("k_n").get<int>();
    p.unique = j.at("unique").get<bool>();
    p.precision = j.at("precision_bits").get<Precision>();
    p.germ_hash = j.at("germ_hash").get<std::string>();
    for (const auto& x : j.at("p_coeffs"))
        p.p.push_back(complex_from(x, p.precision));
    for (const auto& x : j.at("q_coeffs"))
        p.q.push_back(complex_from(x, p.precision));
    if (static_cast<int>(p.q.size()) != p.k_n + 1 || static_cast<int>(p.p.size()) != p.n + 1)
        throw DomainError("inconsistent cached pair");
    return p;
}

std::optional<Germ> ResultCache::load_germ(const std::string& key) const
{
    if (!enabled())
        return std::nullopt;
    const auto j = read_json(dir_ / ("germ-" + key + ".json"));
    if (!j)
        return std::nullopt;
    try {
        return germ_from_json(*j);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void ResultCache::store_germ(const std::string& key, const Germ& g) const
{
    if (enabled())
        write_text(dir_ / ("germ-" + key + ".json"), germ_to_json(g).dump() + "\n");
}

std::optional<PadePair> ResultCache::load_pair(const std::string& key) const
{
    if (!enabled())
        return std::nullopt;
    const auto j = read_json(dir_ / ("pair-" + key + ".json"));
    if (!j)
        return std::nullopt;
    try {
        return pair_from_json(*j);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void ResultCache::store_pair(const std::string& key, const PadePair& p) const
{
    if (enabled())
        write_text(dir_ / ("pair-" + key + ".json"), pair_to_json(p).dump() + "\n");
}

nlohmann::json equilibrium_json(const EquilibriumData& eq)
{
    nlohmann::json j;
    j["endpoints"] = std::vector<double>(eq.support().endpoints().begin(), eq.support().endpoints().end());
    j["capacity"] = eq.capacity();
    j["gamma"] = eq.gamma();
    j["h_coeffs"] = std::vector<double>(eq.h_coeffs().begin(), eq.h_coeffs().end());
    j["masses"] = std::vector<double>(eq.masses().begin(), eq.masses().end());
    j["nodes_per_interval"] = eq.nodes_per_interval();
    j["frostman_deviation"] = eq.frostman_deviation();
    j["hash"] = equilibrium_hash(eq);
    auto crit = nlohmann::json::array();
    for (auto [x, g] : gap_critical_points(eq))
        crit.push_back({{"x", x}, {"green", g}});
    j["gap_critical_points"] = crit;
    return j;
}

bool ExperimentResult::passed() const
{
    return failures.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<CheckResult> check_exact_reproduction(const ConvergenceReport& report, const std::vector<int>& residual_orders)
{
    CheckResult c{"exact", true, ""};
    const double tol = std::ldexp(1.0, -static_cast<int>(report.precision / 2));
    double worst = 0.0;
    int doublets = 0, short_tail = 0;
    for (const auto& r : report.rows) {
        worst = std::max(worst, r.max_abs_error);
        doublets += r.froissart;
    }
    for (int m : residual_orders)
        short_tail += m != kFullTail;
    c.passed = !report.rows.empty() && worst <= tol && doublets == 0 && short_tail == 0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", worst);
    c.detail = std::string("max |R_n| ") + buf + ", doublets " + std::to_string(doublets) + ", rows without full tail " +
               std::to_string(short_tail);
    return {c};
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& opt)
{
    if (!config.spec)
        throw ConfigError("config has no test function");
    const TestFunctionSpec& spec = *config.spec;
    ExperimentResult res;
    res.output = opt.output.value_or(config.output);
    const ResultCache cache(opt.cache.value_or(config.cache));
    std::mutex cache_mutex;

    const int order = config.effective_germ_order();
    auto germ_at = [&](Precision p) {
        const std::string key = stable_hash(spec.hash() + "|" + std::to_string(p) + "|" + std::to_string(order));
        {
            std::lock_guard lock(cache_mutex);
            if (auto g = cache.load_germ(key)) {
                ++res.cache_hits;
                return *g;
            }
        }
        Germ g = germ_at_infinity(spec, order, p);
        std::lock_guard lock(cache_mutex);
        cache.store_germ(key, g);
        return g;
    };
    const Germ base = germ_at(config.precision);
    const std::string base_hash = germ_hash(base);

    std::vector<int> ns;
    for (int n = config.n_min; n <= config.n_max; n += config.n_step)
        ns.push_back(n);
    std::vector<std::optional<PadePair>> slots(ns.size());
    std::vector<std::string> errors(ns.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < ns.size();) {
            const int n = ns[i];
            const std::string key = stable_hash(base_hash + "|" + std::to_string(order) + "|n=" + std::to_string(n));
            {
                std::lock_guard lock(cache_mutex);
                if (auto p = cache.load_pair(key)) {
                    ++res.cache_hits;
                    slots[i] = std::move(*p);
                    continue;
                }
            }
            try {
                PadePair p = pade_pair_escalating(
                    [&](Precision prec) { return prec == config.precision ? base : germ_at(prec); }, n, config.precision);
                std::lock_guard lock(cache_mutex);
                cache.store_pair(key, p);
                slots[i] = std::move(p);
            } catch (const std::exception& e) {
                errors[i] = "n = " + std::to_string(n) + ": " + e.what();
            }
        }
    };
    const int workers = std::max(1, std::min<int>(opt.workers, static_cast<int>(ns.size())));
    {
        std::vector<std::thread> pool;
        for (int w = 1; w < workers; ++w)
            pool.emplace_back(work);
        work();
        for (auto& t : pool)
            t.join();
    }
    std::vector<PadePair> pairs;
    std::vector<int> residual_orders;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (!errors[i].empty())
            res.failures.push_back(errors[i]);
        if (slots[i]) {
            residual_orders.push_back(residual_order(base, *slots[i]));
            pairs.push_back(std::move(*slots[i]));
        }
    }

    std::optional<EquilibriumData> eq;
    if (!spec.factors().empty())
        eq = solve_equilibrium(stahl_compact(spec), config.quadrature_nodes);

    const auto poles = multiplier_poles(spec);
    std::vector<Probe> probe_list;
    for (cplx z : config.probe_values())
        probe_list.push_back({z, ""});
    ProbeSet probes = [&] {
        try {
            if (eq)
                return probe_list.empty() ? ProbeSet::defaults(eq->support(), poles)
                                          : ProbeSet(probe_list, eq->support(), poles);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("probes: ") + e.what());
        }
        if (probe_list.empty())
            for (cplx z : {cplx(2, 0), cplx(-3, 0), cplx(1, 1), cplx(0.2, 0.9)})
                probe_list.push_back({z, ""});
        return ProbeSet::unconstrained(probe_list);
    }();

    RateOptions ro;
    ro.curve_points = config.curve_points;
    ro.window = config.window;
    ro.near_radius = to_real(config.near_radius, "near_radius");
    ro.froissart_tol = to_real(config.froissart_tol, "froissart_tol");
    ro.workers = opt.workers;
    res.report = rate_report(spec, eq ? &*eq : nullptr, pairs, probes, eq ? config.rho_values() : std::vector<double>{}, ro);

    // Artifacts.
    std::filesystem::create_directories(res.output);
    std::map<std::string, std::string> files;
    files["report.csv"] = report_csv(res.report);
    nlohmann::json rj = report_json(res.report);
    rj["config_hash"] = config.hash();
    rj["germ_hash"] = base_hash;
    rj["failures"] = res.failures;
    rj["residual_orders"] = nlohmann::json::array();
    for (int m : residual_orders)
        rj["residual_orders"].push_back(m == kFullTail ? nlohmann::json("full") : nlohmann::json(m));
    files["report.json"] = rj.dump(2) + "\n";
    if (eq) {
        nlohmann::json ej = equilibrium_json(*eq);
        if (config.oracle_grid > 0) {
            const OracleResult o = energy_oracle(eq->support(), config.oracle_grid);
            ej["oracle"] = {{"M", config.oracle_grid},
                            {"gamma_hat", o.gamma_hat},
                            {"capacity_hat", std::exp(-o.gamma_hat)},
                            {"masses", o.masses},
                            {"iterations", o.iterations},
                            {"converged", o.converged}};
        }
        files["equilibrium.json"] = ej.dump(2) + "\n";
    }
    for (const auto& [name, text] : files)
        write_text(res.output / name, text);
    write_plot_data(res.report, res.output / "plots");

    std::vector<std::string> manifest_files;
    for (const auto& [name, text] : files)
        manifest_files.push_back(name + " " + stable_hash(text));
    std::vector<std::filesystem::path> plots;
    for (const auto& e : std::filesystem::directory_iterator(res.output / "plots"))
        plots.push_back(e.path());
    std::sort(plots.begin(), plots.end());
    for (const auto& p : plots) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        manifest_files.push_back("plots/" + p.filename().string() + " " + stable_hash(ss.str()));
    }
    std::string manifest = "config_hash " + config.hash() + "\nspec_hash " + spec.hash() + "\ngerm_hash " + base_hash +
                           "\neq_hash " + (eq ? equilibrium_hash(*eq) : std::string("none")) + "\nprecision_bits " +
                           std::to_string(config.precision) + "\n";
    for (const auto& f : manifest_files)
        manifest += "file " + f + "\n";
    write_text(res.output / "MANIFEST", manifest);

    if (opt.check) {
        for (const auto& c : config.effective_checks())
            if (c == "exact")
                for (auto& r : check_exact_reproduction(res.report, residual_orders))
                    res.checks.push_back(std::move(r));
        if (eq)
            for (auto& r : check_limit_laws(res.report, config.thresholds()))
                res.checks.push_back(std::move(r));
    }
    return res;
}

} // namespace padelab
