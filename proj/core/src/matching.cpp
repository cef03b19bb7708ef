#include "plattice/matching.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace plattice {

namespace {

double l1_dist(const double* z, const std::int32_t* s, int d) {
    double r = 0;
    for (int i = 0; i < d; ++i) r += std::fabs(z[i] - double(s[i]));
    return r;
}

// Dense cell grid over [-half, half]^d in CSR layout.
struct CellGrid {
    int dim;
    std::int64_t half;
    std::int64_t side;
    std::vector<std::int64_t> start;   // size cells+1
    std::vector<std::int64_t> items;   // point indices

    std::int64_t cell_index(const std::int32_t* c) const {
        std::int64_t idx = 0;
        for (int i = 0; i < dim; ++i) {
            std::int64_t v = std::clamp<std::int64_t>(c[i], -half, half) + half;
            idx = idx * side + v;
        }
        return idx;
    }
};

CellGrid build_grid(const double* points, std::size_t n_points, int dim, std::int64_t half) {
    CellGrid g;
    g.dim = dim;
    g.half = half;
    g.side = 2 * half + 1;
    std::int64_t cells = 1;
    for (int i = 0; i < dim; ++i) cells *= g.side;
    g.start.assign(std::size_t(cells + 1), 0);
    std::vector<std::int64_t> cell_of(n_points);
    std::int32_t r[kMaxDim];
    for (std::size_t p = 0; p < n_points; ++p) {
        for (int i = 0; i < dim; ++i) r[i] = std::int32_t(std::llround(points[p * dim + i]));
        cell_of[p] = g.cell_index(r);
        ++g.start[std::size_t(cell_of[p]) + 1];
    }
    for (std::size_t i = 1; i < g.start.size(); ++i) g.start[i] += g.start[i - 1];
    g.items.resize(n_points);
    std::vector<std::int64_t> cursor(g.start.begin(), g.start.end() - 1);
    for (std::size_t p = 0; p < n_points; ++p) g.items[std::size_t(cursor[std::size_t(cell_of[p])]++)] = std::int64_t(p);
    return g;
}

// Integer offsets with |off|_1 <= r, lexicographic.
std::vector<Site> l1_ball_offsets(int dim, int r) {
    std::vector<Site> out;
    Site s = Site::zero(dim);
    std::int32_t off[kMaxDim];
    for (int i = 0; i < dim; ++i) off[i] = std::int32_t(-r);
    while (true) {
        std::int64_t l1 = 0;
        for (int i = 0; i < dim; ++i) l1 += std::abs(off[i]);
        if (l1 <= r) {
            for (int i = 0; i < dim; ++i) s.c[i] = off[i];
            out.push_back(s);
        }
        int i = dim - 1;
        while (i >= 0 && off[i] == r) {
            off[i] = std::int32_t(-r);
            --i;
        }
        if (i < 0) break;
        ++off[i];
    }
    return out;
}

}  // namespace

std::uint64_t SiteMatching::site_index(const Site& s) const {
    const std::int64_t side = 2 * interior_half + 1;
    std::uint64_t idx = 0;
    for (int i = 0; i < dim; ++i)
        idx = idx * std::uint64_t(side) + std::uint64_t(std::int64_t(s.c[i]) + interior_half);
    return idx;
}

bool SiteMatching::in_interior(const Site& s) const {
    for (int i = 0; i < dim; ++i)
        if (s.c[i] < -interior_half || s.c[i] > interior_half) return false;
    return true;
}

SiteMatching match_sites_to_points(const double* points, std::size_t n_points, int dim,
                                   std::int64_t interior_half, const MatchOptions& opt) {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("matching: bad dimension");
    if (interior_half < 0) throw ConfigError("matching: negative interior half-width");
    const std::int64_t side = 2 * interior_half + 1;
    std::uint64_t n_sites = 1;
    for (int i = 0; i < dim; ++i) {
        n_sites *= std::uint64_t(side);
        if (n_sites > (1ull << 26)) throw ResourceError("matching: interior box too large");
    }

    SiteMatching m;
    m.dim = dim;
    m.interior_half = interior_half;
    m.site_to_point.assign(n_sites, -1);
    m.point_to_site.assign(n_points, -1);

    // Points can only land one cell beyond the window box they came from.
    std::int64_t grid_half = interior_half + std::int64_t(std::ceil(opt.edge_radius)) + 2;
    double max_abs = 0;
    for (std::size_t i = 0; i < n_points * std::size_t(dim); ++i)
        max_abs = std::max(max_abs, std::fabs(points[i]));
    grid_half = std::max(grid_half, std::int64_t(std::llround(max_abs)) + 1);
    {
        std::int64_t cells = 1;
        for (int i = 0; i < dim; ++i) {
            cells *= 2 * grid_half + 1;
            if (cells > (1ll << 28)) throw ResourceError("matching: point grid too large");
        }
    }
    const CellGrid grid = build_grid(points, n_points, dim, grid_half);

    const auto site_of_index = [&](std::uint64_t idx) {
        Site s = Site::zero(dim);
        for (int i = dim - 1; i >= 0; --i) {
            s.c[i] = std::int32_t(std::int64_t(idx % std::uint64_t(side)) - interior_half);
            idx /= std::uint64_t(side);
        }
        return s;
    };

    // Initial assignment: each point to its rounded site (first wins).
    std::int32_t rc[kMaxDim];
    for (std::size_t p = 0; p < n_points; ++p) {
        Site r = Site::zero(dim);
        for (int i = 0; i < dim; ++i) {
            rc[i] = std::int32_t(std::llround(points[p * dim + i]));
            r.c[i] = rc[i];
        }
        if (!m.in_interior(r)) continue;
        if (l1_dist(points + p * dim, rc, dim) > opt.edge_radius) continue;
        auto& slot = m.site_to_point[m.site_index(r)];
        if (slot < 0) {
            slot = std::int64_t(p);
            m.point_to_site[p] = std::int64_t(m.site_index(r));
        }
    }

    // Offsets of cells that can hold a point within the edge radius of a site.
    const auto offsets = l1_ball_offsets(dim, int(std::ceil(opt.edge_radius + 0.5 * dim)));

    std::vector<double> dist(n_sites, 0.0);
    std::vector<std::int64_t> via_point(n_sites, -1);
    std::vector<std::uint64_t> via_site(n_sites, 0);
    std::vector<std::uint32_t> epoch(n_sites, 0);
    std::vector<std::uint8_t> inq(n_sites, 0);
    std::uint32_t cur_epoch = 0;
    std::uint64_t relaxations = 0, augmentations = 0;

    const auto label = [&](std::uint64_t s) -> double {
        return epoch[s] == cur_epoch ? dist[s] : std::numeric_limits<double>::infinity();
    };

    for (std::uint64_t s0 = 0; s0 < n_sites; ++s0) {
        if (m.site_to_point[s0] >= 0) continue;
        if (augmentations >= opt.max_augmentations || relaxations >= opt.relaxation_budget) {
            m.budget_hit = true;
            break;
        }
        ++cur_epoch;
        epoch[s0] = cur_epoch;
        dist[s0] = 0.0;
        std::deque<std::uint64_t> q{s0};
        inq[s0] = 1;

        double best_cost = std::numeric_limits<double>::infinity();
        std::int64_t best_point = -1;
        std::uint64_t best_from = 0;

        std::int32_t cc[kMaxDim];
        while (!q.empty() && relaxations < opt.relaxation_budget) {
            const std::uint64_t s = q.front();
            q.pop_front();
            inq[s] = 0;
            const double ds = label(s);
            if (ds >= best_cost) continue;
            const Site site = site_of_index(s);
            for (const auto& off : offsets) {
                for (int i = 0; i < dim; ++i) cc[i] = site.c[i] + off.c[i];
                const std::int64_t cell = grid.cell_index(cc);
                for (std::int64_t ii = grid.start[std::size_t(cell)];
                     ii < grid.start[std::size_t(cell) + 1]; ++ii) {
                    const std::int64_t p = grid.items[std::size_t(ii)];
                    ++relaxations;
                    const double c = l1_dist(points + std::size_t(p) * dim, site.c, dim);
                    if (c > opt.edge_radius) continue;
                    const std::int64_t owner = m.point_to_site[std::size_t(p)];
                    if (owner < 0) {
                        if (ds + c < best_cost) {
                            best_cost = ds + c;
                            best_point = p;
                            best_from = s;
                        }
                        continue;
                    }
                    const std::uint64_t so = std::uint64_t(owner);
                    if (so == s) continue;
                    const Site owner_site = site_of_index(so);
                    const double matched_cost =
                        l1_dist(points + std::size_t(p) * dim, owner_site.c, dim);
                    const double nd = ds + c - matched_cost;
                    if (nd + 1e-12 < label(so)) {
                        epoch[so] = cur_epoch;
                        dist[so] = nd;
                        via_point[so] = p;
                        via_site[so] = s;
                        if (!inq[so]) {
                            if (!q.empty() && nd < label(q.front()))
                                q.push_front(so);
                            else
                                q.push_back(so);
                            inq[so] = 1;
                        }
                    }
                }
            }
        }
        for (const auto s : q) inq[s] = 0;  // budget may leave the queue non-empty

        if (best_point < 0) continue;  // no augmenting path within the radius

        // Collect and validate the alternating path before flipping; a stale
        // label-correcting tree must not be allowed to cycle.
        std::vector<std::pair<std::uint64_t, std::int64_t>> flips;
        {
            std::uint64_t t = best_from;
            std::int64_t give = best_point;
            bool ok = true;
            while (true) {
                flips.emplace_back(t, give);
                if (t == s0) break;
                give = via_point[t];
                t = via_site[t];
                if (flips.size() > n_sites) {
                    ok = false;
                    break;
                }
            }
            if (!ok) {
                m.budget_hit = true;
                continue;
            }
        }
        ++augmentations;
        for (const auto& [t, give] : flips) {
            m.site_to_point[t] = give;
            m.point_to_site[std::size_t(give)] = std::int64_t(t);
        }
    }

    for (std::uint64_t s = 0; s < n_sites; ++s)
        if (m.site_to_point[s] < 0) ++m.unmatched_interior;
    return m;
}

}  // namespace plattice
