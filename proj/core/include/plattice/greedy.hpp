#pragma once

// Greedy lattice-path statistics: the exact oriented-path DP for the maximal
// n-step weight sum from the origin, a nearest-neighbor heuristic lower
// bound, the growth-constant extrapolation with its 1/2 threshold verdict,
// and the chain-displacement discriminator built on site-to-point matching.

#include <cstdint>
#include <vector>

#include "plattice/common.hpp"
#include "plattice/law.hpp"
#include "plattice/matching.hpp"
#include "plattice/process.hpp"
#include "plattice/site_rng.hpp"

namespace plattice {

struct WeightField {
    int dim = 1;
    std::int64_t lo = 0, hi = 0;  // sites in [lo, hi]^d
    std::vector<double> w;

    static WeightField from_l1_perturbations(const PerturbationLaw& law, std::int64_t lo,
                                             std::int64_t hi, const SiteRng& rng);
    static WeightField constant(int dim, std::int64_t lo, std::int64_t hi, double value);

    std::uint64_t index(const Site& s) const;
    bool contains(const Site& s) const;
    double at(const Site& s) const;
    double& at_mut(const Site& s);
};

enum class PathMode { oriented_exact, nn_heuristic };

struct PathValueReport {
    int n = 0;
    double value = 0.0;
    double per_step = 0.0;
    PathMode mode = PathMode::oriented_exact;
    std::vector<Site> witness;  // n+1 sites, origin first
};

// Exact dynamic program over oriented paths of n steps from the origin;
// DP ties break toward the lowest basis index.
PathValueReport max_oriented_path_sum(const WeightField& field, int n);

// Greedy growth with random restarts and segment-regrow moves over
// distinct-site sums; seeded with the oriented optimum, so never below it.
PathValueReport nn_path_sum_heuristic(const WeightField& field, int n, int restarts,
                                      const SiteRng& rng);

struct GrowthPoint {
    int n = 0;
    double mean_per_step = 0.0;
    double se = 0.0;
    int replicates = 0;
};

struct GrowthReport {
    std::vector<GrowthPoint> curve;
    double m_hat = 0.0;   // extrapolated per-step constant (a of a + b/n)
    double fit_b = 0.0;
    double fit_r2 = 0.0;
    bool verdict_available = false;
    bool below_half = false;
    double threshold_epsilon = 0.0;  // scale multiplier where m_hat crosses 1/2
};

// Averages per-step oriented maxima of the |Y|_1 field over replicates and
// extrapolates by fitting a + b/n. Non-monotone or poorly fitted curves
// withhold the verdict.
GrowthReport growth_rate_estimate(const PerturbationLaw& law, const std::vector<int>& n_grid,
                                  int replicates, const SiteRng& rng);

struct ChainOptions {
    std::int64_t interior_shell = 2;  // matched sites stay this far inside the window
    MatchOptions match;
};

struct ChainStatResult {
    double value = 0.0;      // (1/s_j) sum_k |psi(v_k) - v_k|_1, 0 for a trivial chain
    int steps = 0;           // site-to-site moves taken
    double path_len = 0.0;   // s_j
    double disp_sum = 0.0;
    bool truncated = false;  // chain left the interior or lost its assignment early
    bool matching_flagged = false;
};

// Builds psi by min-cost matching of interior sites to points, recovers the
// generating site of a point by rounding, and follows v_{j+1} = W(psi(v_j))
// from the origin for up to n_chain moves.
ChainStatResult chain_displacement_statistic(const PointConfiguration& config, int n_chain,
                                             const ChainOptions& opt = {});

}  // namespace plattice
