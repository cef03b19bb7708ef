#include "plattice/law.hpp"

#include <cmath>

#include "plattice/stable.hpp"
#include "plattice/stats.hpp"

namespace plattice {

namespace {

constexpr double kPi = 3.14159265358979323846;

double surface_area_unit_sphere(int d) {
    // S_d = 2 pi^{d/2} / Gamma(d/2)
    return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

// Composite Simpson for the radial weight r^{d-1} (1 ∧ r^{-a}).
double power_radial_weight_quadrature(int d, double a) {
    const auto w = [&](double r) {
        return std::pow(r, d - 1) * std::min(1.0, std::pow(r, -a));
    };
    auto simpson = [&](double lo, double hi, int n) {
        const double h = (hi - lo) / n;
        double s = w(lo) + w(hi);
        for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * w(lo + i * h);
        return s * h / 3.0;
    };
    // [0,1] exactly polynomial; tail integrated to a cutoff with the
    // analytic remainder appended.
    const double head = simpson(0.0, 1.0, 512);
    const double cutoff = std::pow(1e14, 1.0 / (a - d));  // remainder < 1e-14 relative
    double tail = 0.0;
    double lo = 1.0;
    while (lo < cutoff) {
        const double hi = std::min(lo * 2.0, cutoff);
        tail += simpson(lo, hi, 256);
        lo = hi;
    }
    tail += std::pow(cutoff, double(d) - a) / (a - d);
    return head + tail;
}

double power_w_of(const PerturbationLaw& law) {
    if (law.power_w > 0.0) return law.power_w;
    return 1.0 / double(law.dim) + 1.0 / (law.alpha_exponent - double(law.dim));
}

int blocks_for_normals(int n) { return (n + 1) / 2; }

void fill_normals(const SiteRng& rng, const Site& site, std::uint32_t first_block, int n,
                  double* out) {
    for (int b = 0; b < blocks_for_normals(n); ++b) {
        double z1, z2;
        rng.normal_pair(site, first_block + std::uint32_t(b), z1, z2);
        out[2 * b] = z1;
        if (2 * b + 1 < n) out[2 * b + 1] = z2;
    }
}

}  // namespace

std::string law_kind_name(LawKind k) {
    switch (k) {
        case LawKind::gaussian: return "gaussian";
        case LawKind::stable_symmetric: return "stable_symmetric";
        case LawKind::power_tail: return "power_tail";
    }
    return "?";
}

PerturbationLaw PerturbationLaw::make_gaussian(double sigma, int dim, double eps) {
    PerturbationLaw law;
    law.kind = LawKind::gaussian;
    law.sigma = sigma;
    law.dim = dim;
    law.scale_multiplier = eps;
    law.validate();
    return law;
}

PerturbationLaw PerturbationLaw::make_stable(double alpha, double scale, double eps) {
    PerturbationLaw law;
    law.kind = LawKind::stable_symmetric;
    law.alpha = alpha;
    law.stable_scale = scale;
    law.dim = 1;
    law.scale_multiplier = eps;
    law.validate();
    return law;
}

PerturbationLaw PerturbationLaw::make_power_tail(double alpha_exponent, int dim, double eps) {
    PerturbationLaw law;
    law.kind = LawKind::power_tail;
    law.alpha_exponent = alpha_exponent;
    law.dim = dim;
    law.scale_multiplier = eps;
    law.validate();
    law.power_w = power_radial_weight_quadrature(dim, alpha_exponent);
    return law;
}

void PerturbationLaw::validate() const {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("law dim outside [1," + std::to_string(kMaxDim) + "]");
    if (!(scale_multiplier > 0.0)) throw ConfigError("scale_multiplier must be > 0");
    switch (kind) {
        case LawKind::gaussian:
            if (!(sigma > 0.0)) throw ConfigError("gaussian sigma must be > 0");
            break;
        case LawKind::stable_symmetric:
            if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("stable alpha must be in (0,2]");
            if (!(stable_scale > 0.0)) throw ConfigError("stable scale must be > 0");
            if (dim != 1) throw ConfigError("stable_symmetric law is one-dimensional");
            break;
        case LawKind::power_tail:
            if (!(alpha_exponent > double(dim)))
                throw ConfigError("power_tail requires alpha_exponent > dim for normalizability");
            break;
    }
}

Vec sample(const PerturbationLaw& law, const Site& site, const SiteRng& rng) {
    const int d = law.dim;
    const double eps = law.scale_multiplier;
    Vec y(d);
    switch (law.kind) {
        case LawKind::gaussian: {
            fill_normals(rng, site, 0, d, y.data());
            // eps applied as the final factor, so scaling by eps is exact.
            for (double& v : y) v = v * law.sigma * eps;
            return y;
        }
        case LawKind::stable_symmetric: {
            double u1, u2;
            rng.uniform_pair(site, 0, u1, u2);
            y[0] = stable_sample_std(law.alpha, u1, u2) * law.stable_scale * eps;
            return y;
        }
        case LawKind::power_tail: {
            double u1, u2;
            rng.uniform_pair(site, 0, u1, u2);
            const double w = power_w_of(law);
            const double a = law.alpha_exponent;
            const double w_in = 1.0 / double(d);
            const double x = u1 * w;
            double r;
            if (x < w_in) {
                r = std::pow(x * double(d), 1.0 / double(d));
            } else {
                r = std::pow(1.0 - (x - w_in) * (a - double(d)), -1.0 / (a - double(d)));
            }
            if (d == 1) {
                y[0] = (u2 < 0.5 ? -r : r) * eps;
            } else {
                fill_normals(rng, site, 1, d, y.data());
                double n2 = 0;
                for (double v : y) n2 += v * v;
                const double inv = r / std::sqrt(std::max(n2, 1e-300));
                for (double& v : y) v = v * inv * eps;
            }
            return y;
        }
    }
    throw ConfigError("unknown law kind");
}

Vec iid_sample(const PerturbationLaw& law, const SiteRng& rng, std::uint64_t k) {
    if (k >= (1ull << 31)) throw ResourceError("iid_sample: draw index exceeds 2^31");
    Site s = Site::zero(law.dim);
    s.c[0] = std::int32_t(k);
    return sample(law, s, rng);
}

DensityResult density_ex(const PerturbationLaw& law, const double* y) {
    const int d = law.dim;
    const double eps = law.scale_multiplier;
    switch (law.kind) {
        case LawKind::gaussian: {
            const double s = law.sigma * eps;
            double q = 0;
            for (int i = 0; i < d; ++i) q += y[i] * y[i];
            const double norm = std::pow(2.0 * kPi * s * s, -0.5 * d);
            return DensityResult{norm * std::exp(-q / (2.0 * s * s)), true};
        }
        case LawKind::stable_symmetric: {
            const double g = law.stable_scale * eps;
            const auto r = stable_density_std(law.alpha, y[0] / g);
            return DensityResult{r.value / g, r.accurate};
        }
        case LawKind::power_tail: {
            double q = 0;
            for (int i = 0; i < d; ++i) q += y[i] * y[i];
            const double r = std::sqrt(q) / eps;
            const double w = power_w_of(law);
            const double c = 1.0 / (surface_area_unit_sphere(d) * w);
            const double val = c * std::min(1.0, std::pow(r, -law.alpha_exponent));
            return DensityResult{val / std::pow(eps, d), true};
        }
    }
    throw ConfigError("unknown law kind");
}

double density(const PerturbationLaw& law, const Vec& y) {
    if (int(y.size()) != law.dim) throw ConfigError("density: dimension mismatch");
    return density_ex(law, y.data()).value;
}

double density_ratio(const PerturbationLaw& law, const Vec& y, int direction) {
    if (int(y.size()) != law.dim) throw ConfigError("density_ratio: dimension mismatch");
    if (direction < 0 || direction >= law.dim) throw ConfigError("density_ratio: bad direction");
    if (law.kind == LawKind::gaussian) {
        const double s = law.sigma * law.scale_multiplier;
        return std::exp(-(2.0 * y[direction] + 1.0) / (2.0 * s * s));
    }
    if (law.kind == LawKind::power_tail) {
        // The normalization cancels in the quotient.
        const double eps = law.scale_multiplier;
        double q0 = 0, q1 = 0;
        for (int i = 0; i < law.dim; ++i) {
            const double shifted = y[i] + (i == direction ? 1.0 : 0.0);
            q0 += y[i] * y[i];
            q1 += shifted * shifted;
        }
        const double a = law.alpha_exponent;
        const double f0 = std::min(1.0, std::pow(std::sqrt(q0) / eps, -a));
        const double f1 = std::min(1.0, std::pow(std::sqrt(q1) / eps, -a));
        return f1 / f0;
    }
    Vec shifted = y;
    shifted[direction] += 1.0;
    return density_ex(law, shifted.data()).value / density_ex(law, y.data()).value;
}

EstimateRecord chi_square_factor(const PerturbationLaw& law, int direction,
                                 std::uint64_t mc_budget, const SiteRng& rng,
                                 bool force_monte_carlo) {
    if (mc_budget == 0) throw ConfigError("chi_square_factor: mc_budget must be positive");
    if (direction < 0 || direction >= law.dim) throw ConfigError("chi_square_factor: bad direction");
    if (law.kind == LawKind::gaussian && !force_monte_carlo) {
        const double s = law.sigma * law.scale_multiplier;
        EstimateRecord rec;
        rec.value = std::exp(1.0 / (s * s));
        rec.closed_form = true;
        return rec;
    }
    RunningStat stat;
    for (std::uint64_t k = 0; k < mc_budget; ++k) {
        const Vec y = iid_sample(law, rng, k);
        const double r = density_ratio(law, y, direction);
        stat.add(r * r);
    }
    EstimateRecord rec;
    rec.value = stat.mean();
    rec.std_error = stat.std_error();
    rec.samples = stat.count();
    rec.divergence_suspected = mc_budget >= 100000 && stat.max() > 0.5 * stat.sum();
    return rec;
}

double tail_linf(const PerturbationLaw& law, double m) {
    if (m <= 0.0) return 1.0;
    const double eps = law.scale_multiplier;
    switch (law.kind) {
        case LawKind::gaussian: {
            const double s = law.sigma * eps;
            const double per_coord = 2.0 * normal_cdf(m / s) - 1.0;
            return 1.0 - std::pow(std::max(per_coord, 0.0), law.dim);
        }
        case LawKind::stable_symmetric:
            return std::min(1.0, 2.0 * stable_tail_std(law.alpha, m / (law.stable_scale * eps)));
        case LawKind::power_tail: {
            // Euclidean tail bounds the sup-norm tail.
            const double r = m / eps;
            const double w = power_w_of(law);
            const int d = law.dim;
            const double a = law.alpha_exponent;
            if (r <= 1.0) return 1.0 - std::pow(r, d) / (double(d) * w);
            return std::pow(r, double(d) - a) / ((a - double(d)) * w);
        }
    }
    throw ConfigError("unknown law kind");
}

}  // namespace plattice
