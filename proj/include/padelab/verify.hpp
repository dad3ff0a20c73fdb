#pragma once

// Measurements of the limit laws on computed Padé data: zero distribution,
// nth-root rates of the error function and the approximant, sup norms of
// Q_n on S and on level curves, degree saturation, and the two-sheet identity
//
//     R_n(z^(0)) - R_n(z^(1)) = Q_n(z) (f(z^(0)) - f(z^(1))).

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "padelab/pade.hpp"
#include "padelab/potential.hpp"
#include "padelab/testfn.hpp"

namespace padelab {

// chi(Q_n) / k_n. Throws DomainError when k_n = 0.
DiscreteMeasure zero_measure(const PadePair& pair);
DiscreteMeasure zero_measure(const ZeroMultiset& zeros);

// Zeros of the rational multiplier's denominator (empty without one).
std::vector<cplx> multiplier_poles(const TestFunctionSpec& spec);

struct Probe {
    cplx z;
    std::string label;
};

class ProbeSet {
public:
    // Every probe must keep distance >= 0.1 diam(S) from S and must not sit
    // on a pole of the rational multiplier.
    ProbeSet(std::vector<Probe> probes, const IntervalSystem& s, const std::vector<cplx>& poles = {});
    // center + (diam/2) * {2, -3, 1+i, 0.2+0.9i}
    static ProbeSet defaults(const IntervalSystem& s, const std::vector<cplx>& poles = {});
    // No geometric constraint; for pure rational functions without a cut.
    static ProbeSet unconstrained(std::vector<Probe> probes);
    static std::string label_of(cplx z);

    const std::vector<Probe>& probes() const { return probes_; }

private:
    ProbeSet() = default;
    std::vector<Probe> probes_;
};

struct Discrepancy {
    double pot_gap = 0.0;
    double cdf_gap = 0.0;        // includes discarded_mass
    double discarded_mass = 0.0; // atoms farther than 0.1 from S
};

Discrepancy weak_star_discrepancy(const DiscreteMeasure& mu, const EquilibriumData& eq, const ProbeSet& probes);

// Fraction of the measure within `radius` of S.
double mass_near(const DiscreteMeasure& mu, const IntervalSystem& s, double radius);

struct Doublet {
    BigComplex zero;
    BigComplex pole;
    double distance;
};

// Roots of P_n and Q_n closer than tol to each other and farther than tol
// from S (if given).
std::vector<Doublet> froissart_scan(const PadePair& pair, double tol, const IntervalSystem* s = nullptr);

// |R0 - R1 - Qz (f0 - f1)| / max(|R0|, |Qz (f0 - f1)|).
double identity_residual(const BigComplex& r0, const BigComplex& r1, const BigComplex& qz, const BigComplex& f0,
                         const BigComplex& f1);

struct IdentityResult {
    double max_residual = 0.0;
    int skipped = 0; // points where second-sheet continuation failed
    // min |q_m(z) (f(z^(0)) - f(z^(1)))| over the points.
    double min_modulus = 0.0;
};

IdentityResult identity_check(const TestFunctionSpec& spec, const PadePair& pair, const std::vector<cplx>& points);

struct RhoRow {
    double rho = 0.0;
    double m_root_n = 0.0;  // m_n(rho)^{1/n}
    double m_root_kn = 0.0; // m_n(rho)^{1/k_n}
    std::optional<double> m_n1; // M_{n,1}(rho)
    bool lower_ok = false;
    double m_root_n_med = 0.0;
};

struct ProbeRow {
    std::string label;
    std::optional<double> err_gap;
    std::optional<double> approx_gap;
    std::optional<double> consistency;
    bool flagged = false; // spurious pole at the probe or vanishing error
    std::optional<double> err_gap_med;
    std::optional<double> approx_gap_med;
};

struct ReportRow {
    int n = 0;
    int k_n = 0;
    bool unique = true;
    double degree_ratio = 0.0;
    double max_abs_error = 0.0; // max |R_n| over probes
    std::optional<double> sup_s_q;
    std::optional<double> sup_s_q_med;
    std::vector<RhoRow> rhos;
    std::vector<ProbeRow> probes;
    std::optional<double> pot_gap;
    std::optional<double> cdf_gap;
    std::optional<double> near_mass;
    int froissart = 0;
    std::optional<double> identity_residual;
    std::optional<double> identity_min_modulus;
    int identity_skipped = 0;
};

struct ConvergenceReport {
    std::string spec_hash;
    std::string eq_hash;
    Precision precision = 0;
    double capacity = 0.0;
    std::vector<double> rhos;
    std::vector<Probe> probes;
    std::vector<ReportRow> rows;
    std::vector<std::string> warnings;

    const ReportRow* row(int n) const;
};

struct RateOptions {
    int curve_points = 128;
    int window = 5;
    double lower_slack = 0.02;
    double near_radius = 0.05;
    double froissart_tol = 1e-6;
    int workers = 1;
};

std::string equilibrium_hash(const EquilibriumData& eq);

// eq may be null for a spec without branch cuts; the potential-theoretic
// columns are then left empty.
ConvergenceReport rate_report(const TestFunctionSpec& spec, const EquilibriumData* eq, const std::vector<PadePair>& pairs,
                              const ProbeSet& probes, const std::vector<double>& rhos, const RateOptions& opt = {});

struct LimitLawThresholds {
    int degree_deficit = 1;
    double degree_full_fraction = 0.90;
    int late_lo = 50, late_hi = 60;
    int early_lo = 10, early_hi = 20;
    double sup_s_tol = 0.1;
    double rho_tol = 0.1;
    double lower_slack = 0.02;
    int lower_from = 10;
    double gap_tol = 0.15;
    std::vector<std::string> gap_probes; // labels; empty = all
    int pot_final_n = 60, pot_ref_n = 20;
    double pot_final_tol = 0.1;
    double pot_ratio = 0.5;
    int near_n = 40;
    double near_fraction = 0.90; // at the report's near radius
    bool degree = true, sup_s = true, rho = true, gaps = true, zeros = true;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::vector<CheckResult> check_limit_laws(const ConvergenceReport& report, const LimitLawThresholds& t);

// One row per n; the column order is listed in the header line.
std::string report_csv(const ConvergenceReport& report);
nlohmann::json report_json(const ConvergenceReport& report);
// Two-column (n, value) series, one file per diagnostic.
void write_plot_data(const ConvergenceReport& report, const std::filesystem::path& dir);

} // namespace padelab
