#pragma once

// Finite-window realizations of the perturbed lattice Pi, its deletion and
// insertion variants Pi_S, and the doubled two-layer lattice. All variants
// share per-site randomness exactly, so deleting a site changes the realized
// configuration by precisely that site's point.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plattice/common.hpp"
#include "plattice/law.hpp"
#include "plattice/site_rng.hpp"

namespace plattice {

struct Window {
    int dim = 1;
    std::int64_t radius = 1;        // spatial box [-R, R]^d
    std::int64_t margin = 0;        // extra site shell simulated beyond R
    std::uint64_t site_budget = 1ull << 23;

    void validate() const;
    // (2(R+M)+1)^d, throws ResourceError when it exceeds the budget.
    std::uint64_t site_count_checked() const;
};

struct MarginChoice {
    std::int64_t margin = 0;
    bool truncated = false;   // budget forced a smaller margin than the rule asks
    double tail_p = 0.0;      // P(|Y|_inf > margin) actually achieved
};

// Smallest margin with P(|Y|_inf > M) <= p, capped so the site box fits the
// budget (heavy tails get the cap plus the truncated flag).
MarginChoice margin_by_quantile(const PerturbationLaw& law, std::int64_t radius, int dim,
                                double p = 1e-6, std::uint64_t site_budget = 1ull << 23);

struct DoubledParams {
    double sigma = 1.0;
    double delta = 0.1;
};

// A deleted site; layer 0 deletes the (single-layer) site, layers 1/2 delete
// one layer of a doubled site.
struct SiteLayer {
    Site site;
    int layer = 0;
    bool operator==(const SiteLayer& o) const { return layer == o.layer && site == o.site; }
};

struct ProcessSpec {
    PerturbationLaw law;
    std::vector<SiteLayer> deleted_sites;
    std::vector<Vec> inserted_points;
    std::optional<DoubledParams> doubled;  // replaces law when present

    int dim() const { return law.dim; }
    void validate() const;
};

// Returns spec with S merged into deleted_sites (layer 0).
ProcessSpec delete_sites(ProcessSpec spec, const std::vector<Site>& s);
ProcessSpec delete_doubled(ProcessSpec spec, const Site& site, int layer);

struct PointConfiguration {
    int dim = 1;
    double radius = 0.0;  // spatial half-width of the window box
    std::vector<double> coords;  // flat, dim-stride
    bool blinded = false;
    // Parallel provenance arrays, empty when blinded. Layer: 0 single-layer
    // lattice point, 1/2 doubled layers, -1 inserted (prov_site unused).
    std::vector<Site> prov_site;
    std::vector<std::int8_t> prov_layer;

    std::size_t size() const { return dim ? coords.size() / dim : 0; }
    const double* point(std::size_t i) const { return coords.data() + i * std::size_t(dim); }
    PointConfiguration blind() const;
};

PointConfiguration realize(const ProcessSpec& spec, const Window& window, const SiteRng& rng);

// Two correlated layers: Y_x ~ N_d(0,(sigma^2-delta^2)I) on stream +0,
// Y'_{x,i} ~ N_d(0,delta^2 I) on streams +1,+2; emits x + Y_x + Y'_{x,i}.
PointConfiguration realize_doubled(double sigma, double delta, const Window& window,
                                   const SiteRng& rng,
                                   const std::vector<SiteLayer>& deleted = {});

struct Box {
    Vec lo;
    Vec hi;
};

// Appends k uniform points in v (provenance "inserted").
PointConfiguration insert_uniform(PointConfiguration config, const Box& v, int k,
                                  const SiteRng& rng);

// JSONL: one point per line {"coords": [...], "site": [...]?, "layer": n?};
// blinded configurations carry no site/layer bytes.
std::string to_jsonl(const PointConfiguration& config);
PointConfiguration from_jsonl(const std::string& text, int dim, double radius);

}  // namespace plattice
