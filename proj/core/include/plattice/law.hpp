#pragma once

// Perturbation laws: the distribution of the i.i.d. site displacements Y_x.
// Three families: isotropic Gaussian N_d(0, sigma^2 I), one-dimensional
// symmetric alpha-stable, and the everywhere-positive power-tail family with
// density proportional to 1 ∧ |x|^{-a}. A global scale multiplier eps maps
// samples y -> eps*y and densities g(y) -> eps^{-d} g(y/eps).

#include <cstdint>
#include <string>

#include "plattice/common.hpp"
#include "plattice/site_rng.hpp"

namespace plattice {

enum class LawKind { gaussian, stable_symmetric, power_tail };

std::string law_kind_name(LawKind k);

struct PerturbationLaw {
    LawKind kind = LawKind::gaussian;
    int dim = 1;
    double sigma = 1.0;            // gaussian
    double alpha = 1.0;            // stable_symmetric, in (0,2]
    double stable_scale = 1.0;     // stable_symmetric scale
    double alpha_exponent = 2.0;   // power_tail exponent a, requires a > dim
    double scale_multiplier = 1.0; // the eps of "perturbations eps * Y_x"

    // Radial normalization weight of the power-tail family,
    // int_0^inf r^{d-1} (1 ∧ r^{-a}) dr, fixed once per law by quadrature in
    // the factories. Zero means "not yet computed" and density falls back to
    // the analytic value.
    double power_w = 0.0;

    static PerturbationLaw make_gaussian(double sigma, int dim, double eps = 1.0);
    static PerturbationLaw make_stable(double alpha, double scale, double eps = 1.0);
    static PerturbationLaw make_power_tail(double alpha_exponent, int dim, double eps = 1.0);

    void validate() const;  // throws ConfigError on invalid parameters
    bool heavy_tailed() const {
        return kind == LawKind::power_tail ||
               (kind == LawKind::stable_symmetric && alpha < 2.0);
    }
};

struct DensityResult {
    double value = 0.0;
    bool accurate = true;  // numeric-evaluation accuracy flag (stable laws)
};

struct EstimateRecord {
    double value = 0.0;
    double std_error = 0.0;
    bool closed_form = false;
    bool divergence_suspected = false;
    std::uint64_t samples = 0;
};

// Y_x: deterministic in (law, site, rng); independent across distinct sites.
Vec sample(const PerturbationLaw& law, const Site& site, const SiteRng& rng);

// Convenience for i.i.d. Monte Carlo draws: the k-th draw of the stream.
Vec iid_sample(const PerturbationLaw& law, const SiteRng& rng, std::uint64_t k);

DensityResult density_ex(const PerturbationLaw& law, const double* y);
double density(const PerturbationLaw& law, const Vec& y);

// g(y + e_i) / g(y); Gaussian uses the cancellation-free closed form
// exp(-(2 y_i + 1) / (2 sigma_eff^2)).
double density_ratio(const PerturbationLaw& law, const Vec& y, int direction);

// rho_i = int (g(x+e_i)/g(x))^2 g(x) dx. Gaussian closed form
// exp(1/sigma_eff^2); otherwise Monte Carlo with a running-maximum
// divergence heuristic (top sample > 50% of the sum at budget >= 1e5).
EstimateRecord chi_square_factor(const PerturbationLaw& law, int direction,
                                 std::uint64_t mc_budget, const SiteRng& rng,
                                 bool force_monte_carlo = false);

// Tail probabilities of the scaled law (used by the margin rule and the
// boundary-control oracle). tail_linf is P(|Y|_inf > m); radial laws bound
// it by the Euclidean tail.
double tail_linf(const PerturbationLaw& law, double m);

}  // namespace plattice
