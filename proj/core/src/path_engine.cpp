#include "plattice/path_engine.hpp"

#include <algorithm>
#include <cmath>

#include "plattice/stats.hpp"

namespace plattice {

namespace {

Site index_site(std::uint64_t a, std::uint64_t b) {
    Site s = Site::zero(2);
    s.c[0] = std::int32_t(a & 0x7fffffffu);
    s.c[1] = std::int32_t(b & 0x7fffffffu);
    return s;
}

int pick_step(const std::vector<double>& cum, double u) {
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    int idx = int(it - cum.begin());
    if (idx >= int(cum.size())) idx = int(cum.size()) - 1;
    return idx;
}

}  // namespace

std::vector<Site> OrientedPath::sites() const {
    std::vector<Site> out;
    out.reserve(steps.size() + 1);
    Site cur = Site::zero(dim);
    out.push_back(cur);
    for (const auto s : steps) {
        cur.c[s] += 1;
        out.push_back(cur);
    }
    return out;
}

void PathMeasureSpec::validate() const {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("path measure dim outside range");
    if (!step_weights.empty()) {
        if (int(step_weights.size()) != dim) throw ConfigError("step_weights size != dim");
        double s = 0;
        for (double w : step_weights) {
            if (!(w > 0)) throw ConfigError("step_weights must be positive");
            s += w;
        }
        if (std::fabs(s - 1.0) > 1e-9) throw ConfigError("step_weights must sum to 1");
    }
}

std::vector<double> PathMeasureSpec::cumulative() const {
    std::vector<double> cum(dim);
    double acc = 0;
    for (int i = 0; i < dim; ++i) {
        acc += step_weights.empty() ? 1.0 / dim : step_weights[i];
        cum[i] = acc;
    }
    cum[dim - 1] = 1.0;
    return cum;
}

OrientedPath sample_path(const PathMeasureSpec& spec, int n, const SiteRng& rng,
                         std::uint64_t path_index) {
    spec.validate();
    if (n < 1) throw ConfigError("sample_path: n must be >= 1");
    const auto cum = spec.cumulative();
    OrientedPath p;
    p.dim = spec.dim;
    p.steps.resize(n);
    for (int k = 0; k < n; ++k) {
        const double u = rng.uniform(index_site(path_index, std::uint64_t(k)), 0);
        p.steps[k] = std::uint8_t(pick_step(cum, u));
    }
    return p;
}

std::int64_t intersection_count(const OrientedPath& a, const OrientedPath& b) {
    if (a.dim != b.dim) throw ConfigError("intersection_count: dimension mismatch");
    const std::size_t n = std::min(a.length(), b.length());
    Site pa = Site::zero(a.dim), pb = Site::zero(a.dim);
    std::int64_t count = 1;  // origin
    for (std::size_t k = 0; k < n; ++k) {
        pa.c[a.steps[k]] += 1;
        pb.c[b.steps[k]] += 1;
        if (pa == pb) ++count;
    }
    return count;
}

namespace {

struct FitResult {
    double theta = 1.0;
    double r2 = 0.0;
    double intercept = 0.0;
    bool available = false;
};

// Least squares on log-survival over bins with >= min_count observations.
FitResult fit_tail(const std::vector<std::int64_t>& counts, std::int64_t replicates,
                   std::int64_t min_count) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] >= min_count && counts[i] > 0) {
            xs.push_back(double(i + 1));  // k = i+1
            ys.push_back(std::log(double(counts[i]) / double(replicates)));
        }
    }
    FitResult fr;
    if (xs.size() < 2) return fr;
    const auto f = least_squares(xs, ys);
    fr.theta = std::exp(f.slope);
    fr.r2 = f.r2;
    fr.intercept = f.intercept;
    // Availability: enough bins and a genuinely log-linear tail. A flat
    // degenerate curve (d=1) fits exactly with slope 0.
    fr.available = xs.size() >= 4 && f.r2 >= 0.98;
    return fr;
}

std::vector<std::int64_t> survival_counts(const std::vector<std::int64_t>& ns) {
    std::int64_t max_n = 0;
    for (auto v : ns) max_n = std::max(max_n, v);
    std::vector<std::int64_t> counts(std::size_t(max_n), 0);  // counts[i] = #{N >= i+1}
    for (auto v : ns)
        for (std::int64_t k = 1; k <= v; ++k) ++counts[std::size_t(k - 1)];
    return counts;
}

}  // namespace

TailCurve eit_tail_estimate(const PathMeasureSpec& spec, const std::vector<int>& n_grid,
                            int replicates, const SiteRng& rng) {
    spec.validate();
    if (n_grid.empty()) throw ConfigError("eit_tail_estimate: empty n grid");
    if (replicates < 1000) throw ConfigError("eit_tail_estimate: replicates must be >= 1e3");

    TailCurve out;
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        const int n = n_grid[gi];
        const SiteRng sub(derive_seed(rng.seed, 0xE17 + gi), rng.stream);
        std::vector<std::int64_t> ns(std::size_t(replicates), 0);
        for (int r = 0; r < replicates; ++r) {
            const auto a = sample_path(spec, n, sub, 2 * std::uint64_t(r));
            const auto b = sample_path(spec, n, sub, 2 * std::uint64_t(r) + 1);
            ns[std::size_t(r)] = intersection_count(a, b);
        }
        const auto counts = survival_counts(ns);
        const auto fit = fit_tail(counts, replicates, 50);
        out.theta_by_n.emplace_back(n, fit.theta);

        if (gi + 1 == n_grid.size()) {
            out.fit_available = fit.available;
            out.theta_hat = fit.theta;
            out.fit_r2 = fit.r2;
            for (std::size_t i = 0; i < counts.size(); ++i) {
                out.k.push_back(std::int64_t(i + 1));
                out.survival.push_back(double(counts[i]) / double(replicates));
                out.fit.push_back(fit.available
                                      ? std::exp(fit.intercept + std::log(fit.theta) * double(i + 1))
                                      : 0.0);
            }
            // Nonparametric bootstrap: resample the N sample 200 times.
            constexpr int kBoot = 200;
            std::vector<double> thetas;
            std::vector<std::vector<double>> surv_boot(counts.size());
            const SiteRng brng(derive_seed(rng.seed, 0xB005), rng.stream);
            for (int bi = 0; bi < kBoot; ++bi) {
                std::vector<std::int64_t> res(ns.size());
                for (std::size_t j = 0; j < ns.size(); ++j) {
                    const double u = brng.uniform(index_site(std::uint64_t(bi), j), 0);
                    res[j] = ns[std::size_t(u * double(ns.size()))];
                }
                const auto bc = survival_counts(res);
                const auto bf = fit_tail(bc, replicates, 50);
                if (bf.available || fit.available) thetas.push_back(bf.theta);
                for (std::size_t i = 0; i < counts.size(); ++i)
                    surv_boot[i].push_back(i < bc.size() ? double(bc[i]) / double(replicates) : 0.0);
            }
            for (std::size_t i = 0; i < counts.size(); ++i) {
                out.lo.push_back(quantile(surv_boot[i], 0.025));
                out.hi.push_back(quantile(surv_boot[i], 0.975));
            }
            if (!thetas.empty()) {
                out.theta_lo = quantile(thetas, 0.025);
                out.theta_hi = quantile(thetas, 0.975);
            } else {
                out.theta_lo = out.theta_hi = fit.theta;
            }
        }
    }
    return out;
}

Vec ShiftedField::at(const Site& x) const {
    Vec y = sample(law_, x, rng_);
    const auto it = delta_.find(x);
    if (it != delta_.end())
        for (int i = 0; i < law_.dim; ++i) y[i] += double(it->second.c[i]);
    return y;
}

void ShiftedField::apply_path_shift(const OrientedPath& path, int extra_step, int sign) {
    if (path.dim != law_.dim) throw ConfigError("shifted_field: dimension mismatch");
    if (extra_step < 0 || extra_step >= law_.dim) throw ConfigError("shifted_field: bad extra step");
    const auto sites = path.sites();
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const int dir = i + 1 < sites.size() ? path.steps[i] : extra_step;
        Site& d = delta_.try_emplace(sites[i], Site::zero(law_.dim)).first->second;
        d.d = law_.dim;
        d.c[dir] += std::int32_t(sign);
        // Keep the map minimal so composed shifts cancel structurally.
        bool zero = true;
        for (int j = 0; j < law_.dim; ++j) zero = zero && d.c[j] == 0;
        if (zero) delta_.erase(sites[i]);
    }
}

bool ShiftedField::shift_empty() const { return delta_.empty(); }

ShiftedField shifted_field(const PerturbationLaw& law, const SiteRng& rng,
                           const OrientedPath& path, int extra_step) {
    ShiftedField f(law, rng);
    f.apply_path_shift(path, extra_step, +1);
    return f;
}

EstimateRecord pair_product_factor(const PerturbationLaw& law, int j, int j2,
                                   std::uint64_t mc_budget, const SiteRng& rng) {
    if (j < 0 || j >= law.dim || j2 < 0 || j2 >= law.dim)
        throw ConfigError("pair_product_factor: bad direction");
    if (law.kind == LawKind::gaussian) {
        const double s = law.sigma * law.scale_multiplier;
        EstimateRecord rec;
        rec.value = j == j2 ? std::exp(1.0 / (s * s)) : 1.0;
        rec.closed_form = true;
        return rec;
    }
    if (mc_budget == 0) throw ConfigError("pair_product_factor: mc_budget must be positive");
    RunningStat stat;
    for (std::uint64_t k = 0; k < mc_budget; ++k) {
        const Vec y = iid_sample(law, rng, k);
        stat.add(density_ratio(law, y, j) * density_ratio(law, y, j2));
    }
    EstimateRecord rec;
    rec.value = stat.mean();
    rec.std_error = stat.std_error();
    rec.samples = stat.count();
    rec.divergence_suspected = mc_budget >= 100000 && stat.max() > 0.5 * stat.sum();
    return rec;
}

SecondMomentReport second_moment_estimate(const PerturbationLaw& law,
                                          const PathMeasureSpec& spec, int n,
                                          std::uint64_t replicates, const SiteRng& rng) {
    spec.validate();
    if (law.dim != spec.dim) throw ConfigError("second_moment_estimate: dimension mismatch");
    if (n < 1 || replicates < 2) throw ConfigError("second_moment_estimate: bad parameters");

    // Per-site factor table over ordered direction pairs.
    const int d = law.dim;
    std::vector<double> factor(std::size_t(d) * d, 1.0);
    bool closed = law.kind == LawKind::gaussian;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            const SiteRng sub(derive_seed(rng.seed, 0xFAC0 + std::uint64_t(a) * 17 + b), rng.stream);
            factor[std::size_t(a) * d + b] =
                pair_product_factor(law, a, b, closed ? 1 : 200000, sub).value;
        }
    const double rho_diag = *std::max_element(factor.begin(), factor.end());

    EstimateRecord rho_rec;
    if (closed) {
        rho_rec = chi_square_factor(law, 0, 1, rng);
    } else {
        const SiteRng sub(derive_seed(rng.seed, 0xC41), rng.stream);
        rho_rec = chi_square_factor(law, 0, 200000, sub);
    }
    const double rho = std::max(rho_rec.value, rho_diag);

    SecondMomentReport rep;
    rep.rho = rho;
    rep.rho_closed_form = rho_rec.closed_form;

    RunningStat exact_stat, bound_stat, exact_half;
    const SiteRng prng(derive_seed(rng.seed, 0x9A7), rng.stream);
    for (std::uint64_t r = 0; r < replicates; ++r) {
        // Paths carry one extra step so the terminal shared site has an
        // outgoing direction for its factor.
        const auto a = sample_path(spec, n + 1, prng, 2 * r);
        const auto b = sample_path(spec, n + 1, prng, 2 * r + 1);
        Site pa = Site::zero(d), pb = Site::zero(d);
        double prod = factor[std::size_t(a.steps[0]) * d + b.steps[0]];
        std::int64_t shared = 1;
        for (int k = 1; k <= n; ++k) {
            pa.c[a.steps[k - 1]] += 1;
            pb.c[b.steps[k - 1]] += 1;
            if (pa == pb) {
                ++shared;
                prod *= factor[std::size_t(a.steps[k]) * d + b.steps[k]];
            }
        }
        const double bound = std::pow(rho, double(shared));
        if (prod > bound * (1.0 + 1e-12)) ++rep.pair_violations;
        exact_stat.add(prod);
        bound_stat.add(bound);
        if (r < replicates / 2) exact_half.add(prod);
    }
    rep.exact_factor_estimate = exact_stat.mean();
    rep.exact_factor_se = exact_stat.std_error();
    rep.rho_bound_estimate = bound_stat.mean();
    rep.rho_bound_se = bound_stat.std_error();
    rep.pairs = replicates;
    rep.stabilization_rel_change =
        std::fabs(exact_half.mean() - exact_stat.mean()) / std::max(exact_stat.mean(), 1e-300);
    rep.divergence_suspected = bound_stat.max() > 0.5 * bound_stat.sum();
    rep.bounded_verdict = !rep.divergence_suspected && rep.stabilization_rel_change < 0.05;
    return rep;
}

}  // namespace plattice
