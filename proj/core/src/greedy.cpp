#include "plattice/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "plattice/stats.hpp"

namespace plattice {

namespace {

// Enumerate sites with nonnegative coordinates summing to exactly `total`.
void layer_sites(int dim, int total, Site& cur, int axis, std::vector<Site>& out) {
    if (axis == dim - 1) {
        cur.c[axis] = std::int32_t(total);
        out.push_back(cur);
        return;
    }
    for (int v = 0; v <= total; ++v) {
        cur.c[axis] = std::int32_t(v);
        layer_sites(dim, total - v, cur, axis + 1, out);
    }
}

std::vector<Site> simplex_layer(int dim, int total) {
    std::vector<Site> out;
    Site cur = Site::zero(dim);
    layer_sites(dim, total, cur, 0, out);
    return out;
}

double path_value_distinct(const WeightField& field, const std::vector<Site>& sites) {
    std::unordered_set<Site, SiteHash> seen;
    double v = 0;
    for (const auto& s : sites)
        if (seen.insert(s).second) v += field.at(s);
    return v;
}

Site index_site2(std::uint64_t a, std::uint64_t b) {
    Site s = Site::zero(2);
    s.c[0] = std::int32_t(a & 0x7fffffffu);
    s.c[1] = std::int32_t(b & 0x7fffffffu);
    return s;
}

}  // namespace

WeightField WeightField::from_l1_perturbations(const PerturbationLaw& law, std::int64_t lo,
                                               std::int64_t hi, const SiteRng& rng) {
    law.validate();
    if (hi < lo) throw ConfigError("weight field: empty box");
    WeightField f;
    f.dim = law.dim;
    f.lo = lo;
    f.hi = hi;
    const std::int64_t side = hi - lo + 1;
    std::uint64_t n = 1;
    for (int i = 0; i < law.dim; ++i) {
        n *= std::uint64_t(side);
        if (n > (1ull << 26)) throw ResourceError("weight field too large");
    }
    f.w.resize(n);
    Site s = Site::zero(law.dim);
    for (int i = 0; i < law.dim; ++i) s.c[i] = std::int32_t(lo);
    std::uint64_t idx = 0;
    while (true) {
        const Vec y = sample(law, s, rng);
        f.w[idx++] = l1_norm(y.data(), law.dim);
        int i = law.dim - 1;
        while (i >= 0 && s.c[i] == hi) {
            s.c[i] = std::int32_t(lo);
            --i;
        }
        if (i < 0) break;
        ++s.c[i];
    }
    return f;
}

WeightField WeightField::constant(int dim, std::int64_t lo, std::int64_t hi, double value) {
    WeightField f;
    f.dim = dim;
    f.lo = lo;
    f.hi = hi;
    const std::int64_t side = hi - lo + 1;
    std::uint64_t n = 1;
    for (int i = 0; i < dim; ++i) n *= std::uint64_t(side);
    f.w.assign(n, value);
    return f;
}

std::uint64_t WeightField::index(const Site& s) const {
    const std::int64_t side = hi - lo + 1;
    std::uint64_t idx = 0;
    for (int i = 0; i < dim; ++i)
        idx = idx * std::uint64_t(side) + std::uint64_t(std::int64_t(s.c[i]) - lo);
    return idx;
}

bool WeightField::contains(const Site& s) const {
    if (s.d != dim) return false;
    for (int i = 0; i < dim; ++i)
        if (s.c[i] < lo || s.c[i] > hi) return false;
    return true;
}

double WeightField::at(const Site& s) const {
    if (!contains(s)) throw ConfigError("weight field: site outside box");
    return w[index(s)];
}

double& WeightField::at_mut(const Site& s) {
    if (!contains(s)) throw ConfigError("weight field: site outside box");
    return w[index(s)];
}

PathValueReport max_oriented_path_sum(const WeightField& field, int n) {
    if (n < 0) throw ConfigError("max_oriented_path_sum: negative n");
    if (field.lo > 0 || field.hi < n)
        throw ConfigError("max_oriented_path_sum: n exceeds the field window");
    const int d = field.dim;

    // value(x, k) = w(x) + max_i value(x + e_i, k - 1), backward over layers.
    std::unordered_map<Site, double, SiteHash> next, cur;
    std::vector<std::unordered_map<Site, std::uint8_t, SiteHash>> choices(std::size_t(n) + 1);
    for (int j = n; j >= 0; --j) {
        cur.clear();
        for (const auto& x : simplex_layer(d, j)) {
            double v = field.at(x);
            if (j < n) {
                double best = -1;
                std::uint8_t arg = 0;
                for (int i = 0; i < d; ++i) {
                    const double cand = next.at(x.shifted(i, 1));
                    if (cand > best) {  // strict: lowest basis index wins ties
                        best = cand;
                        arg = std::uint8_t(i);
                    }
                }
                v += best;
                choices[std::size_t(j)][x] = arg;
            }
            cur[x] = v;
        }
        std::swap(cur, next);
    }

    PathValueReport rep;
    rep.n = n;
    rep.mode = PathMode::oriented_exact;
    Site x = Site::zero(d);
    rep.value = next.at(x);
    rep.per_step = n > 0 ? rep.value / double(n) : rep.value;
    rep.witness.push_back(x);
    for (int j = 0; j < n; ++j) {
        x = x.shifted(choices[std::size_t(j)].at(x), 1);
        rep.witness.push_back(x);
    }
    return rep;
}

namespace {

std::vector<Site> greedy_nn_path(const WeightField& field, const std::vector<Site>& prefix, int n,
                                 const SiteRng& rng, std::uint64_t run_id) {
    const int d = field.dim;
    std::vector<Site> path = prefix;
    std::unordered_set<Site, SiteHash> visited(path.begin(), path.end());
    while (int(path.size()) < n + 1) {
        const Site& cur = path.back();
        const std::uint64_t k = path.size();
        const double u = rng.uniform(index_site2(run_id, k), 0);
        double best = -1;
        Site pick = cur;
        bool found = false;
        // Exploration rate cycles across restarts, from pure greedy to wild.
        const bool explore = u < 0.15 * double(run_id % 5);
        const int forced = int(u * 16 * d) % (2 * d);
        for (int m = 0; m < 2 * d; ++m) {
            const Site nb = cur.shifted(m / 2, m % 2 == 0 ? 1 : -1);
            if (!field.contains(nb)) continue;
            if (explore && m == forced) {
                pick = nb;
                found = true;
                break;
            }
            const double direct = visited.count(nb) ? 0.0 : field.at(nb);
            // Depth-2 lookahead: the best fresh follow-up from nb.
            double follow = 0.0;
            for (int m2 = 0; m2 < 2 * d; ++m2) {
                const Site nb2 = nb.shifted(m2 / 2, m2 % 2 == 0 ? 1 : -1);
                if (!field.contains(nb2) || nb2 == cur) continue;
                if (!visited.count(nb2) && !(nb2 == nb))
                    follow = std::max(follow, field.at(nb2));
            }
            const double gain = direct + 0.5 * follow;
            if (gain > best) {
                best = gain;
                pick = nb;
                found = true;
            }
        }
        if (!found) break;  // boxed in (cannot happen away from corners)
        path.push_back(pick);
        visited.insert(pick);
    }
    return path;
}

}  // namespace

PathValueReport nn_path_sum_heuristic(const WeightField& field, int n, int restarts,
                                      const SiteRng& rng) {
    if (restarts < 0) throw ConfigError("nn_path_sum_heuristic: negative restarts");
    PathValueReport best = max_oriented_path_sum(field, n);
    best.mode = PathMode::nn_heuristic;

    std::uint64_t run_id = 0;
    const std::vector<Site> origin_only{Site::zero(field.dim)};
    const auto consider = [&](const std::vector<Site>& cand) {
        if (int(cand.size()) != n + 1) return false;
        const double v = path_value_distinct(field, cand);
        if (v > best.value + 1e-15) {
            best.value = v;
            best.witness = cand;
            return true;
        }
        return false;
    };

    // Beam pass: keep the best partial paths per layer, extend by all
    // neighbors. Width grows with the restart budget.
    {
        struct Partial {
            std::vector<Site> path;
            double value;
        };
        const std::size_t width = 32 + 16 * std::size_t(restarts);
        std::vector<Partial> beam{{origin_only, field.at(origin_only[0])}};
        for (int k = 0; k < n; ++k) {
            std::vector<Partial> next;
            next.reserve(beam.size() * 2 * std::size_t(field.dim));
            for (const auto& part : beam) {
                const Site& cur = part.path.back();
                for (int m = 0; m < 2 * field.dim; ++m) {
                    Site nb = cur.shifted(m / 2, m % 2 == 0 ? 1 : -1);
                    if (!field.contains(nb)) continue;
                    Partial ext{part.path, part.value};
                    ext.path.push_back(nb);
                    bool fresh = true;
                    for (const auto& s : part.path) fresh = fresh && !(s == nb);
                    if (fresh) ext.value += field.at(nb);
                    next.push_back(std::move(ext));
                }
            }
            std::sort(next.begin(), next.end(),
                      [](const Partial& a, const Partial& b) { return a.value > b.value; });
            if (next.size() > width) next.resize(width);
            beam = std::move(next);
        }
        for (const auto& part : beam) consider(part.path);
    }

    for (int r = 0; r < restarts; ++r) {
        consider(greedy_nn_path(field, origin_only, n, rng, ++run_id));
        // Hill-climb by regrowing every suffix of the incumbent until a full
        // pass finds no improvement.
        bool improved = true;
        int pass = 0;
        while (improved && pass < 8) {
            improved = false;
            ++pass;
            for (int cut = 1; cut < n; ++cut) {
                std::vector<Site> prefix(best.witness.begin(), best.witness.begin() + cut);
                improved |= consider(greedy_nn_path(field, prefix, n, rng, ++run_id));
            }
        }
    }
    best.per_step = n > 0 ? best.value / double(n) : best.value;
    return best;
}

GrowthReport growth_rate_estimate(const PerturbationLaw& law, const std::vector<int>& n_grid,
                                  int replicates, const SiteRng& rng) {
    law.validate();
    if (n_grid.empty() || replicates < 2) throw ConfigError("growth_rate_estimate: bad inputs");
    GrowthReport rep;
    std::vector<double> xs, ys, ws;
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        const int n = n_grid[gi];
        std::vector<double> vals(std::size_t(replicates), 0.0);
        for (int r = 0; r < replicates; ++r) {
            const SiteRng frng(derive_seed(rng.seed, 0x6A0000 + gi * 65536 + std::uint64_t(r)),
                               rng.stream);
            const auto field = WeightField::from_l1_perturbations(law, 0, n, frng);
            vals[std::size_t(r)] = max_oriented_path_sum(field, n).per_step;
        }
        GrowthPoint pt;
        pt.n = n;
        pt.mean_per_step = mean(vals);
        pt.se = std_error_of_mean(vals);
        pt.replicates = replicates;
        rep.curve.push_back(pt);
        xs.push_back(1.0 / double(n));
        ys.push_back(pt.mean_per_step);
        ws.push_back(pt.se);
    }
    const auto fit = least_squares(xs, ys);
    rep.m_hat = fit.intercept;
    rep.fit_b = fit.slope;
    rep.fit_r2 = fit.r2;

    bool monotone = true;  // per-step means should not rise with n
    for (std::size_t i = 1; i < rep.curve.size(); ++i) {
        const double rise = rep.curve[i].mean_per_step - rep.curve[i - 1].mean_per_step;
        if (rise > 3.0 * (rep.curve[i].se + rep.curve[i - 1].se)) monotone = false;
    }
    rep.verdict_available = monotone && rep.fit_r2 > 0.5 && rep.m_hat > 0;
    rep.below_half = rep.m_hat < 0.5;
    rep.threshold_epsilon =
        rep.m_hat > 0 ? 0.5 * law.scale_multiplier / rep.m_hat : 0.0;
    return rep;
}

ChainStatResult chain_displacement_statistic(const PointConfiguration& config, int n_chain,
                                             const ChainOptions& opt) {
    if (!config.blinded) throw ConfigError("chain_displacement_statistic: config must be blinded");
    if (n_chain < 1) throw ConfigError("chain_displacement_statistic: n_chain must be >= 1");
    const int d = config.dim;
    const std::int64_t r_int = std::int64_t(std::floor(config.radius)) - opt.interior_shell;
    if (r_int < 1) throw ConfigError("chain_displacement_statistic: window too small");

    const SiteMatching m =
        match_sites_to_points(config.coords.data(), config.size(), d, r_int, opt.match);

    ChainStatResult res;
    res.matching_flagged = m.budget_hit || m.unmatched_interior > 0;

    Site v = Site::zero(d);
    std::unordered_set<Site, SiteHash> visited{v};
    while (true) {
        if (!m.in_interior(v)) {
            res.truncated = true;
            break;
        }
        const std::int64_t p = m.site_to_point[m.site_index(v)];
        if (p < 0) {
            res.truncated = true;
            break;
        }
        const double* z = config.point(std::size_t(p));
        double disp = 0;
        std::int64_t hop = 0;
        Site w = Site::zero(d);
        for (int i = 0; i < d; ++i) {
            disp += std::fabs(z[i] - double(v.c[i]));
            w.c[i] = std::int32_t(std::llround(z[i]));
            hop += std::abs(std::int64_t(w.c[i]) - std::int64_t(v.c[i]));
        }
        res.disp_sum += disp;
        if (w == v) break;  // psi fixes this site: the chain is complete
        if (res.steps == n_chain) break;
        res.path_len += double(hop);
        ++res.steps;
        if (!visited.insert(w).second) {
            res.truncated = true;  // cycle guard; cannot happen for a true deletion chain
            break;
        }
        v = w;
    }
    res.value = res.path_len > 0 ? res.disp_sum / res.path_len : 0.0;
    return res;
}

}  // namespace plattice
