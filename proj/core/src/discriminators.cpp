#include "plattice/discriminators.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "plattice/greedy.hpp"
#include "plattice/parallel.hpp"
#include "plattice/stats.hpp"

namespace plattice {

std::vector<double> ScheduleSpec::m_values(double window_radius, bool* truncated) const {
    if (length < 1) throw ConfigError("schedule length must be >= 1");
    if (kind == Kind::geometric && !(m0 > 0)) throw ConfigError("schedule m0 must be > 0");
    std::vector<double> out;
    bool trunc = false;
    for (int l = 0; l < length; ++l) {
        const double m = kind == Kind::geometric
                             ? m0 * std::pow(2.0, double(l))
                             : std::exp(2.0 * double(l + 1) * double(l + 1));
        if (m > window_radius) {
            trunc = true;
            break;
        }
        out.push_back(m);
    }
    if (truncated) *truncated = trunc;
    if (out.empty()) throw ConfigError("schedule has no scale inside the window");
    return out;
}

double psi(const PointConfiguration& config, double m) {
    if (config.dim != 1) throw ConfigError("psi: one-dimensional configurations only");
    if (!(m > 0)) throw ConfigError("psi: m must be positive");
    double acc = 0;
    for (std::size_t i = 0; i < config.size(); ++i) {
        const double a = std::fabs(config.coords[i]);
        if (a < m) acc += m - a;
    }
    return acc / m;
}

double psi_schedule_average(const PointConfiguration& config, const ScheduleSpec& schedule) {
    const auto ms = schedule.m_values(config.radius);
    double acc = 0;
    for (const double m : ms) acc += psi(config, m);
    return acc / double(ms.size());
}

NullMeanCurve estimate_null_mean_curve(const ProcessSpec& null_spec, const Window& window,
                                       const ScheduleSpec& schedule, int replicates,
                                       std::uint64_t seed, int threads) {
    if (replicates < 2) throw ConfigError("null mean curve needs replicates >= 2");
    NullMeanCurve curve;
    curve.m = schedule.m_values(double(window.radius));
    curve.replicates = replicates;
    std::vector<std::vector<double>> values{std::size_t(replicates)};
    parallel_for(std::uint64_t(replicates), threads, [&](std::uint64_t r) {
        const SiteRng rng(derive_seed(seed, 0x0CfEE000 + r), 0);
        const auto config = realize(null_spec, window, rng).blind();
        auto& row = values[std::size_t(r)];
        row.reserve(curve.m.size());
        for (const double m : curve.m) row.push_back(psi(config, m));
    });
    curve.mean.assign(curve.m.size(), 0.0);
    for (const auto& row : values)
        for (std::size_t i = 0; i < row.size(); ++i) curve.mean[i] += row[i];
    for (auto& v : curve.mean) v /= double(replicates);
    return curve;
}

double deleted_mass_estimator(const PointConfiguration& config, const NullMeanCurve& curve,
                              const ScheduleSpec& schedule) {
    const auto ms = schedule.m_values(config.radius);
    if (ms.size() != curve.m.size()) throw ConfigError("deleted_mass: schedule/curve mismatch");
    for (std::size_t i = 0; i < ms.size(); ++i)
        if (std::fabs(ms[i] - curve.m[i]) > 1e-9 * std::max(1.0, ms[i]))
            throw ConfigError("deleted_mass: schedule scales differ from the curve");
    double acc = 0;
    for (std::size_t i = 0; i < ms.size(); ++i) acc += curve.mean[i] - psi(config, ms[i]);
    return acc / double(ms.size());
}

namespace {

struct PairCand {
    double dist;
    std::int64_t a, b;
};

std::int64_t pack_cell3(const std::int64_t* c, int d) {
    std::int64_t v = 0;
    for (int i = 0; i < d; ++i) v = (v << 21) | ((c[i] + (1 << 20)) & 0x1FFFFF);
    return v;
}

}  // namespace

PairingStat sibling_pairing_stat(const PointConfiguration& config, double pairing_radius,
                                 double boundary_shell) {
    if (!config.blinded) throw ConfigError("sibling_pairing_stat: config must be blinded");
    if (!(pairing_radius > 0)) throw ConfigError("sibling_pairing_stat: bad radius");
    const int d = config.dim;
    const std::size_t n = config.size();

    // Cell grid at the pairing radius for candidate generation.
    std::unordered_map<std::int64_t, std::vector<std::int64_t>> cells;
    cells.reserve(n * 2);
    const double inv_r = 1.0 / pairing_radius;
    std::int64_t cc[kMaxDim];
    for (std::size_t i = 0; i < n; ++i) {
        const double* z = config.point(i);
        for (int k = 0; k < d; ++k) cc[k] = std::int64_t(std::floor(z[k] * inv_r));
        cells[pack_cell3(cc, d)].push_back(std::int64_t(i));
    }

    std::vector<PairCand> cands;
    std::int64_t off[kMaxDim];
    for (std::size_t i = 0; i < n; ++i) {
        const double* zi = config.point(i);
        for (int k = 0; k < d; ++k) cc[k] = std::int64_t(std::floor(zi[k] * inv_r));
        for (int k = 0; k < d; ++k) off[k] = -1;
        while (true) {
            std::int64_t nb[kMaxDim];
            for (int k = 0; k < d; ++k) nb[k] = cc[k] + off[k];
            const auto it = cells.find(pack_cell3(nb, d));
            if (it != cells.end()) {
                for (const auto j : it->second) {
                    if (j <= std::int64_t(i)) continue;
                    const double* zj = config.point(std::size_t(j));
                    double q = 0;
                    for (int k = 0; k < d; ++k) q += (zi[k] - zj[k]) * (zi[k] - zj[k]);
                    const double dist = std::sqrt(q);
                    if (dist <= pairing_radius) cands.push_back({dist, std::int64_t(i), j});
                }
            }
            int k = d - 1;
            while (k >= 0 && off[k] == 1) {
                off[k] = -1;
                --k;
            }
            if (k < 0) break;
            ++off[k];
        }
    }
    std::sort(cands.begin(), cands.end(), [](const PairCand& a, const PairCand& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.a != b.a) return a.a < b.a;
        return a.b < b.b;
    });

    std::vector<std::uint8_t> paired(n, 0);
    std::vector<double> dists;
    for (const auto& c : cands) {
        if (paired[std::size_t(c.a)] || paired[std::size_t(c.b)]) continue;
        paired[std::size_t(c.a)] = paired[std::size_t(c.b)] = 1;
        dists.push_back(c.dist);
    }

    PairingStat stat;
    const double interior = config.radius - boundary_shell;
    for (std::size_t i = 0; i < n; ++i) {
        if (paired[i]) continue;
        const double* z = config.point(i);
        bool inside = true;
        for (int k = 0; k < d; ++k) inside = inside && std::fabs(z[k]) <= interior;
        if (inside) ++stat.unpaired_interior;
    }
    if (!dists.empty()) {
        stat.pair_distance_quantiles = {quantile(dists, 0.5), quantile(dists, 0.9),
                                        quantile(dists, 0.99)};
    }
    return stat;
}

Statistic make_chain_statistic(int n_chain, const ChainOptions& opt) {
    Statistic s;
    s.name = "chain_displacement";
    s.eval = [n_chain, opt](const PointConfiguration& config) {
        return chain_displacement_statistic(config, n_chain, opt).value;
    };
    return s;
}

Statistic make_pairing_statistic(double pairing_radius, double boundary_shell) {
    Statistic s;
    s.name = "sibling_pairing";
    s.eval = [pairing_radius, boundary_shell](const PointConfiguration& config) {
        return double(sibling_pairing_stat(config, pairing_radius, boundary_shell).unpaired_interior);
    };
    return s;
}

Statistic make_deleted_mass_statistic(const ProcessSpec& null_spec, const Window& window,
                                      const ScheduleSpec& schedule, int curve_replicates,
                                      std::uint64_t seed, int threads) {
    const auto curve = estimate_null_mean_curve(null_spec, window, schedule, curve_replicates,
                                                derive_seed(seed, 0x40C114), threads);
    Statistic s;
    s.name = "psi_deleted_mass";
    s.eval = [curve, schedule](const PointConfiguration& config) {
        return deleted_mass_estimator(config, curve, schedule);
    };
    return s;
}

TestReport power_experiment(const ProcessSpec& null_spec, const ProcessSpec& alt_spec,
                            const Statistic& statistic, const Window& window, int replicates,
                            double alpha_level, std::uint64_t seed, int threads) {
    if (replicates < 100) throw ConfigError("power_experiment: replicates must be >= 100");
    if (!(alpha_level > 0 && alpha_level < 1)) throw ConfigError("power_experiment: bad level");
    null_spec.validate();
    alt_spec.validate();

    const auto run_bank = [&](const ProcessSpec& spec, std::uint64_t salt) {
        std::vector<double> vals(std::size_t(replicates), 0.0);
        parallel_for(std::uint64_t(replicates), threads, [&](std::uint64_t r) {
            const SiteRng rng(derive_seed(seed, salt + r), 0);
            const auto config = realize(spec, window, rng).blind();
            vals[std::size_t(r)] = statistic.eval(config);
        });
        return vals;
    };

    const auto calib = run_bank(null_spec, 0xCA1B00000ull);
    const auto held_null = run_bank(null_spec, 0x1E7E10000ull);
    const auto alt = run_bank(alt_spec, 0xA17000000ull);

    // One-sided empirical quantile; ties break toward not rejecting.
    const double threshold = quantile(calib, 1.0 - alpha_level);
    const auto frac_above = [&](const std::vector<double>& vals) {
        std::uint64_t k = 0;
        for (const double v : vals) k += v > threshold ? 1 : 0;
        return std::pair<std::uint64_t, double>{k, double(k) / double(vals.size())};
    };

    TestReport rep;
    rep.statistic = statistic.name;
    rep.replicates = replicates;
    rep.alpha_level = alpha_level;
    rep.threshold = threshold;
    const auto [ln, level] = frac_above(held_null);
    rep.level_hat = level;
    const auto lci = clopper_pearson(ln, std::uint64_t(replicates));
    rep.level_ci_lo = lci.lo;
    rep.level_ci_hi = lci.hi;
    const auto [pn, power] = frac_above(alt);
    rep.power = power;
    const auto pci = clopper_pearson(pn, std::uint64_t(replicates));
    rep.ci_lo = pci.lo;
    rep.ci_hi = pci.hi;
    return rep;
}

}  // namespace plattice
