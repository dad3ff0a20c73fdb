#pragma once

// Logarithmic potential theory on finite unions of disjoint real intervals.
//
// The equilibrium density on S = [a_1,a_2] u ... u [a_{2p-1},a_{2p}] is
//
//     d lambda_S / dx = |h(x)| / (pi sqrt|prod_i (x - a_i)|),   deg h = p - 1,
//
// with h fixed by the p-1 gap conditions and unit total mass. On each
// interval we use x = c + r cos(theta); lambda_S then has a smooth density
// G_j(theta)/pi in theta whose cosine coefficients give the logarithmic
// potential in closed form anywhere in the plane:
//
//     (1/pi) int_0^pi cos(k t) log|zeta - cos t| dt
//         = log|Phi/2|               (k = 0)
//         = -Re(Phi^{-k}) / k        (k >= 1),    Phi = zeta + sqrt(zeta^2 - 1).

#include <complex>
#include <span>
#include <utility>
#include <vector>

namespace padelab {

using cplx = std::complex<double>;

class IntervalSystem {
public:
    // Endpoints a_1 < a_2 < ... < a_{2p}.
    explicit IntervalSystem(std::vector<double> endpoints);
    static IntervalSystem from_intervals(std::vector<std::pair<double, double>> intervals);

    int count() const { return static_cast<int>(endpoints_.size() / 2); }
    double left(int j) const { return endpoints_[2 * static_cast<std::size_t>(j)]; }
    double right(int j) const { return endpoints_[2 * static_cast<std::size_t>(j) + 1]; }
    std::span<const double> endpoints() const { return endpoints_; }

    double lo() const { return endpoints_.front(); }
    double hi() const { return endpoints_.back(); }
    double diameter() const { return hi() - lo(); }
    double center() const { return 0.5 * (lo() + hi()); }
    double distance(cplx z) const;

    friend bool operator==(const IntervalSystem&, const IntervalSystem&) = default;

private:
    std::vector<double> endpoints_;
};

// Inverse Zhukovskii map of [-1,1], branch with |Phi| >= 1.
cplx zhukovskii_exterior(cplx zeta);

struct QuadNode {
    double x;
    double weight; // lambda_S mass carried by the node
    int interval;
};

class EquilibriumData {
public:
    const IntervalSystem& support() const { return support_; }
    // Coefficients of h in powers of t = (x - center)/(diameter/2).
    std::span<const double> h_coeffs() const { return h_; }
    double gamma() const { return gamma_; }
    double capacity() const { return capacity_; }
    int nodes_per_interval() const { return k_; }
    std::span<const QuadNode> nodes() const { return nodes_; }
    std::span<const double> masses() const { return masses_; }
    // max over nodes of |V(x) - gamma|.
    double frostman_deviation() const { return frostman_dev_; }

    double h(double x) const;
    // Density of lambda_S with respect to dx; zero off S.
    double density(double x) const;
    // lambda_S((-inf, x]).
    double cdf(double x) const;
    // Logarithmic potential V(z) = int log(1/|z - t|) d lambda_S(t).
    double potential(cplx z) const;

private:
    friend EquilibriumData solve_equilibrium(const IntervalSystem& s, int nodes_per_interval);

    explicit EquilibriumData(IntervalSystem s) : support_(std::move(s)) {}

    IntervalSystem support_;
    std::vector<double> h_;
    double gamma_ = 0.0;
    double capacity_ = 0.0;
    int k_ = 0;
    std::vector<QuadNode> nodes_;
    std::vector<double> masses_;
    // Cosine coefficients of G_j, one row per interval.
    std::vector<std::vector<double>> cheb_;
    double frostman_dev_ = 0.0;
};

EquilibriumData solve_equilibrium(const IntervalSystem& s, int nodes_per_interval = 128);

// g_S(z, infinity) = max(0, gamma - V(z)).
double green(const EquilibriumData& eq, cplx z);

// Zeros of h in the gaps and the Green function values there (the levels at
// which components of the level sets merge).
std::vector<std::pair<double, double>> gap_critical_points(const EquilibriumData& eq);

struct LevelCurve {
    double rho = 0.0;
    std::vector<cplx> points;
    std::vector<int> component; // component index per point
    int components = 0;
};

// M points on {g_S = log rho}, arclength-uniform per component.
LevelCurve level_curve(const EquilibriumData& eq, double rho, int points);

struct Atom {
    cplx location;
    double weight;
};

struct DiscreteMeasure {
    std::vector<Atom> atoms;
    double total_mass() const;
};

// U^mu(z) = sum w_i log(1/|z - x_i|). Throws DomainError when z sits on an atom.
double potential_of_measure(const DiscreteMeasure& mu, cplx z);

// lambda_S discretized at the quadrature nodes.
DiscreteMeasure quadrature_measure(const EquilibriumData& eq);

struct OracleResult {
    double gamma_hat = 0.0;
    DiscreteMeasure measure;
    std::vector<double> masses; // per interval
    int iterations = 0;
    bool converged = false;
};

// Minimizes the discrete logarithmic energy over weights on a fixed
// arcsine-spaced grid of M cells by accelerated projected gradient.
OracleResult energy_oracle(const IntervalSystem& s, int grid_points, int max_iterations = 20000);

} // namespace padelab
