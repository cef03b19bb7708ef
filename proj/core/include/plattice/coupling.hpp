#pragma once

// The explicit heavy-tail coupling: dyadic annulus decomposition with exact
// lattice counts, the uniform-mixture thinning table, binomial
// redistribution with per-annulus maximal couplings, and exact
// shifted-binomial total-variation distances.

#include <cstdint>
#include <utility>
#include <vector>

#include "plattice/common.hpp"
#include "plattice/law.hpp"
#include "plattice/site_rng.hpp"

namespace plattice {

struct Annulus {
    double r_lo = 0.0, r_hi = 0.0;     // Euclidean radius range (r_lo, r_hi]
    std::int64_t lattice_count = 0;    // |H_i ∩ (Z^d \ {0})|
    double volume = 0.0;               // |H_i|
    double union_volume = 0.0;         // |H_i ∪ H_{i+1}|
    double r_ratio = 0.0;              // |H_i| / |H_i ∪ H_{i+1}|
};

struct AnnulusDecomposition {
    int dim = 1;
    int i_max = 2;
    std::vector<Annulus> annuli;  // annuli[i-1] is H_i
    double c1 = 0.0, c2 = 0.0;    // measured bounds of count/2^{id} and vol/2^{id}

    // 1-based annulus of a site, 0 for the origin or outside the ball.
    int annulus_of(const Site& s) const;
};

AnnulusDecomposition build_annuli(int d, int i_max);

struct MixtureRow {
    double floor_grid = 0.0;       // grid-minimized density floor over the pair region
    double floor_certified = 0.0;  // exact floor from radial monotonicity
    double floor = 0.0;            // the one used (min of the two)
    double p = 0.0;                // floor * |H_i ∪ H_{i+1}|, capped at 1
    double c3_i = 0.0;             // floor * 2^{alpha i}
};

struct MixtureTable {
    std::vector<MixtureRow> rows;
    double alpha = 0.0;  // tail exponent entering the 2^{-alpha i} scaling
    double c3 = 0.0;     // min_i c3_i
    double c4 = 0.0;     // c1 * c3, as in the construction
    double c5 = 0.0;     // c1 * c4 / 2
};

// Power-tail laws only; throws ConfigError when the heavy-tail floor fails
// on the verification grid.
MixtureTable mixture_table(const PerturbationLaw& law, const AnnulusDecomposition& ann,
                           int grid_points_per_annulus = 10000);

struct CouplingTranscript {
    int i_max = 0;
    std::vector<Site> zeta_sites;        // sites with zeta_x = 1
    std::vector<std::int64_t> z, zhat;   // per annulus, zhat[0] = z[0] + 1
    std::vector<std::int64_t> w, what;
    std::vector<std::int64_t> u, uhat;
    std::vector<double> tv;              // exact TV of the coupled pair given Z
    bool success = false;       // U == Uhat over the coupled range i <= i_max - 1
    bool success_full = false;  // agreement through i_max as well
    bool event_e = false;       // Z_i >= 1 v c5 2^{i(2d-alpha)} for all i
    double cond_success_prob = 0.0;  // prod over coupled annuli of (1 - tv_i)
};

CouplingTranscript run_coupling(const AnnulusDecomposition& ann, const MixtureTable& mix,
                                const SiteRng& rng);

struct BinomialShiftTv {
    double tv = 0.0;     // exact d_TV(B(n,p), B(n,p)+1)
    double bound = 0.0;  // 2 exp(-(np)^{3/2}/n) + c8 (np)^{-1/4}
    double c8 = 0.0;
};

// Exact by stable pmf recursion around the mode; overflow-safe in log space.
BinomialShiftTv binomial_shift_tv(std::int64_t n, double p);
double binomial_tv_c8();  // the fitted constant of the bound, computed once

// Exact maximal coupling of two pmfs on the common support {0..K}:
// P(outputs equal) = 1 - d_TV(a,b), marginals exact.
std::pair<int, int> maximal_coupling(const std::vector<double>& pmf_a,
                                     const std::vector<double>& pmf_b, const SiteRng& rng,
                                     std::uint64_t draw_key);

double total_variation(const std::vector<double>& pmf_a, const std::vector<double>& pmf_b);

// Exact binomial pmf over 0..n (n modest); log-space recursion.
std::vector<double> binomial_pmf(std::int64_t n, double p);

// Deterministic semi-analytic P(success) of the truncated coupling:
// prod over coupled annuli of E_Z[1 - tv_i(Z)] by enumeration.
double coupling_success_probability(const AnnulusDecomposition& ann, const MixtureTable& mix);

}  // namespace plattice
