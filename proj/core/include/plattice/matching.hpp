#pragma once

// Min-cost bipartite assignment between interior lattice sites and observed
// points, specialised for near-lattice geometry: candidate edges are capped
// at a small l1 radius, the initial assignment comes from nearest-site
// rounding, and remaining deficits are fixed by successive shortest
// augmenting paths. Exact for small perturbations (where rounding is already
// optimal); a budgeted surrogate beyond that, with flags.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "plattice/common.hpp"

namespace plattice {

struct MatchOptions {
    double edge_radius = 2.5;          // max |z - s|_1 for a candidate edge
    std::uint64_t max_augmentations = 4000;
    std::uint64_t relaxation_budget = 80'000'000;
};

struct SiteMatching {
    int dim = 1;
    std::int64_t interior_half = 0;            // sites in [-h, h]^d are matched
    std::vector<std::int64_t> site_to_point;   // -1 = unmatched, indexed by dense site index
    std::vector<std::int64_t> point_to_site;   // -1 = free point
    std::uint64_t unmatched_interior = 0;
    bool budget_hit = false;

    std::uint64_t site_index(const Site& s) const;
    bool in_interior(const Site& s) const;
};

// points: flat coords (dim-stride). Matches every interior site to a point
// when an augmenting path within the edge radius exists.
SiteMatching match_sites_to_points(const double* points, std::size_t n_points, int dim,
                                   std::int64_t interior_half, const MatchOptions& opt = {});

}  // namespace plattice
