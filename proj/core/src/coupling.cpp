#include "plattice/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "plattice/stats.hpp"

namespace plattice {

namespace {

constexpr double kPi = 3.14159265358979323846;

double ball_volume(int d, double r) {
    return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0) * std::pow(r, d);
}

std::int64_t isqrt_floor(std::int64_t v) {
    if (v < 0) return -1;
    std::int64_t r = std::int64_t(std::sqrt(double(v)));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}

// Lattice points of Z^d in the closed Euclidean ball of radius 2^i (exact
// integer arithmetic), origin included.
std::int64_t ball_lattice_count(int d, std::int64_t r) {
    const std::int64_t r2 = r * r;
    if (d == 1) return 2 * r + 1;
    if (d == 2) {
        std::int64_t c = 0;
        for (std::int64_t x = -r; x <= r; ++x) c += 2 * isqrt_floor(r2 - x * x) + 1;
        return c;
    }
    if (d == 3) {
        std::int64_t c = 0;
        for (std::int64_t x = -r; x <= r; ++x) {
            const std::int64_t rem = r2 - x * x;
            const std::int64_t ymax = isqrt_floor(rem);
            for (std::int64_t y = -ymax; y <= ymax; ++y) c += 2 * isqrt_floor(rem - y * y) + 1;
        }
        return c;
    }
    throw ResourceError("build_annuli: exact lattice counts supported for d <= 3");
}

}  // namespace

int AnnulusDecomposition::annulus_of(const Site& s) const {
    std::int64_t n2 = 0;
    for (int i = 0; i < s.d; ++i) n2 += std::int64_t(s.c[i]) * s.c[i];
    if (n2 == 0) return 0;
    std::int64_t bound = 4;  // (2^1)^2
    for (int i = 1; i <= i_max; ++i) {
        if (n2 <= bound) return i;
        bound *= 4;
    }
    return 0;
}

AnnulusDecomposition build_annuli(int d, int i_max) {
    if (i_max < 2) throw ConfigError("build_annuli: i_max must be >= 2");
    if (d < 1) throw ConfigError("build_annuli: bad dimension");
    const std::int64_t r_top = std::int64_t(1) << i_max;
    // Enumeration cost grows like r^{d-1}.
    double cost = 1;
    for (int k = 0; k < d - 1; ++k) cost *= double(2 * r_top + 1);
    if (cost > 4e8) throw ResourceError("build_annuli: enumeration budget exceeded");

    AnnulusDecomposition ann;
    ann.dim = d;
    ann.i_max = i_max;
    std::vector<std::int64_t> ball_counts(std::size_t(i_max) + 1);
    for (int i = 1; i <= i_max; ++i) ball_counts[std::size_t(i)] = ball_lattice_count(d, std::int64_t(1) << i);

    ann.c1 = 1e300;
    ann.c2 = 0.0;
    for (int i = 1; i <= i_max; ++i) {
        Annulus a;
        a.r_hi = double(std::int64_t(1) << i);
        a.r_lo = i == 1 ? 0.0 : double(std::int64_t(1) << (i - 1));
        a.lattice_count = i == 1 ? ball_counts[1] - 1
                                 : ball_counts[std::size_t(i)] - ball_counts[std::size_t(i) - 1];
        a.volume = i == 1 ? ball_volume(d, 2.0) : ball_volume(d, a.r_hi) - ball_volume(d, a.r_lo);
        const double next_hi = a.r_hi * 2.0;
        a.union_volume = ball_volume(d, next_hi) - (i == 1 ? 0.0 : ball_volume(d, a.r_lo));
        a.r_ratio = a.volume / a.union_volume;
        ann.annuli.push_back(a);

        const double scale = std::pow(2.0, double(i) * d);
        ann.c1 = std::min({ann.c1, double(a.lattice_count) / scale, a.volume / scale});
        ann.c2 = std::max({ann.c2, double(a.lattice_count) / scale, a.volume / scale});
    }
    return ann;
}

MixtureTable mixture_table(const PerturbationLaw& law, const AnnulusDecomposition& ann,
                           int grid_points_per_annulus) {
    law.validate();
    if (law.kind != LawKind::power_tail)
        throw ConfigError("mixture_table: only the power_tail family is supported");
    if (law.dim != ann.dim) throw ConfigError("mixture_table: dimension mismatch");

    const double a_exp = law.alpha_exponent;
    MixtureTable mix;
    mix.alpha = a_exp;

    // Heavy-tail floor verification on a radial sample grid: the law's
    // density over 1 ∧ |x|^{-alpha} must be bounded below by a positive
    // constant. For this family the ratio is the normalization constant, but
    // the check is performed numerically as a guard for future families.
    {
        Vec probe(law.dim, 0.0);
        double worst = 1e300;
        for (int k = 0; k <= 64; ++k) {
            const double r = std::pow(2.0, -2.0 + 0.35 * k);
            probe[0] = r;
            const double ratio = density(law, probe) / std::min(1.0, std::pow(r, -a_exp));
            worst = std::min(worst, ratio);
        }
        if (!(worst > 0.0))
            throw ConfigError("mixture_table: heavy-tail floor violated on the sample grid");
    }

    // Per-annulus floors: the exact certified floor uses radial monotonicity
    // (worst pair at |y - x| = r_hi(i) + r_hi(i+1)); the grid floor scans
    // x in H_i, y in H_i ∪ H_{i+1} radially with refinement near the rim.
    for (int i = 1; i <= ann.i_max; ++i) {
        const Annulus& h = ann.annuli[std::size_t(i) - 1];
        const double worst_sep = h.r_hi + 2.0 * h.r_hi;  // r_hi(i) + r_hi(i+1)
        Vec probe(law.dim, 0.0);
        probe[0] = worst_sep;
        MixtureRow row;
        row.floor_certified = density(law, probe);

        const int nx = std::max(8, int(std::sqrt(double(grid_points_per_annulus) / 4)));
        const int ny = 4 * nx;
        double g_min = 1e300;
        for (int xi = 0; xi <= nx; ++xi) {
            const double rx = h.r_lo + (h.r_hi - h.r_lo) * double(xi) / nx;
            for (int yi = 0; yi <= ny; ++yi) {
                // Refine quadratically toward the outer rim where g is smallest.
                const double t = double(yi) / ny;
                const double ry = (i == 1 ? 0.0 : h.r_lo) + (2.0 * h.r_hi - (i == 1 ? 0.0 : h.r_lo)) *
                                                                 (1.0 - (1.0 - t) * (1.0 - t));
                // Separation extremes for these radii (opposite orientation).
                probe[0] = rx + ry;
                g_min = std::min(g_min, density(law, probe));
                probe[0] = std::fabs(rx - ry);
                g_min = std::min(g_min, density(law, probe));
            }
        }
        row.floor_grid = g_min;
        row.floor = std::min(row.floor_grid, row.floor_certified);
        if (!(row.floor > 0.0))
            throw ConfigError("mixture_table: nonpositive density floor at annulus " +
                              std::to_string(i));
        row.p = std::min(1.0, row.floor * h.union_volume);
        row.c3_i = row.floor * std::pow(2.0, a_exp * i);
        mix.rows.push_back(row);
    }
    mix.c3 = 1e300;
    for (const auto& r : mix.rows) mix.c3 = std::min(mix.c3, r.c3_i);
    mix.c4 = ann.c1 * mix.c3;
    mix.c5 = 0.5 * ann.c1 * mix.c4;
    return mix;
}

std::vector<double> binomial_pmf(std::int64_t n, double p) {
    if (n < 0 || !(p > 0.0 && p < 1.0)) throw ConfigError("binomial_pmf: bad parameters");
    std::vector<double> pmf(std::size_t(n) + 1, 0.0);
    // Start at the mode in log space, recurse outward.
    const std::int64_t mode = std::min<std::int64_t>(n, std::int64_t((double(n) + 1.0) * p));
    const double logp = std::log(p), logq = std::log1p(-p);
    const double log_mode = std::lgamma(double(n) + 1.0) - std::lgamma(double(mode) + 1.0) -
                            std::lgamma(double(n - mode) + 1.0) + double(mode) * logp +
                            double(n - mode) * logq;
    pmf[std::size_t(mode)] = std::exp(log_mode);
    for (std::int64_t j = mode; j > 0; --j) {
        // pmf[j-1] = pmf[j] * j (1-p) / ((n-j+1) p)
        pmf[std::size_t(j) - 1] =
            pmf[std::size_t(j)] * double(j) * (1.0 - p) / (double(n - j + 1) * p);
        if (pmf[std::size_t(j) - 1] < 1e-300) break;
    }
    for (std::int64_t j = mode; j < n; ++j) {
        pmf[std::size_t(j) + 1] =
            pmf[std::size_t(j)] * double(n - j) * p / (double(j + 1) * (1.0 - p));
        if (pmf[std::size_t(j) + 1] < 1e-300) break;
    }
    return pmf;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t k = std::max(a.size(), b.size());
    double tv = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const double pa = j < a.size() ? a[j] : 0.0;
        const double pb = j < b.size() ? b[j] : 0.0;
        tv += std::fabs(pa - pb);
    }
    return 0.5 * tv;
}

BinomialShiftTv binomial_shift_tv(std::int64_t n, double p) {
    if (n < 1 || !(p > 0.0 && p < 1.0)) throw ConfigError("binomial_shift_tv: bad parameters");
    // Exact TV between B(n,p) and B(n,p)+1 by pmf recursion from the mode,
    // truncated where the pmf underflows; tails contribute |p_j - p_{j-1}|
    // telescoped, which the windowed sum captures once values are ~1e-30.
    const double np = double(n) * p;
    const double sd = std::sqrt(np * (1.0 - p));
    const std::int64_t mode = std::min<std::int64_t>(n, std::int64_t((double(n) + 1.0) * p));
    const std::int64_t lo = std::max<std::int64_t>(0, mode - std::int64_t(45.0 * sd) - 4);
    const std::int64_t hi = std::min<std::int64_t>(n, mode + std::int64_t(45.0 * sd) + 4);

    const double logp = std::log(p), logq = std::log1p(-p);
    const double log_mode = std::lgamma(double(n) + 1.0) - std::lgamma(double(mode) + 1.0) -
                            std::lgamma(double(n - mode) + 1.0) + double(mode) * logp +
                            double(n - mode) * logq;
    std::vector<double> pmf(std::size_t(hi - lo) + 1, 0.0);
    pmf[std::size_t(mode - lo)] = std::exp(log_mode);
    for (std::int64_t j = mode; j > lo; --j)
        pmf[std::size_t(j - 1 - lo)] =
            pmf[std::size_t(j - lo)] * double(j) * (1.0 - p) / (double(n - j + 1) * p);
    for (std::int64_t j = mode; j < hi; ++j)
        pmf[std::size_t(j + 1 - lo)] =
            pmf[std::size_t(j - lo)] * double(n - j) * p / (double(j + 1) * (1.0 - p));

    double sum = 0.0;
    double prev = 0.0;  // pmf at lo-1 (zero or negligible)
    for (std::size_t j = 0; j < pmf.size(); ++j) {
        sum += std::fabs(pmf[j] - prev);
        prev = pmf[j];
    }
    sum += prev;  // the shifted mass at hi+1

    BinomialShiftTv out;
    out.tv = 0.5 * sum;
    out.c8 = binomial_tv_c8();
    out.bound = 2.0 * std::exp(-std::pow(np, 1.5) / double(n)) + out.c8 * std::pow(np, -0.25);
    return out;
}

double binomial_tv_c8() {
    // Fitted once: the smallest constant making the bound dominate the exact
    // TV on a reference grid with np and n(1-p) large.
    static const double c8 = [] {
        double c = 0.0;
        for (const double p : {0.5, 2.0 / 3.0, 0.75}) {
            for (const double np : {1e2, 3e2, 1e3, 3e3, 1e4, 1e5, 1e6}) {
                const std::int64_t n = std::int64_t(np / p);
                const double np_eff = double(n) * p;
                // exact tv without the bound (avoid recursion into c8)
                const std::int64_t mode = std::min<std::int64_t>(n, std::int64_t((double(n) + 1.0) * p));
                const double sd = std::sqrt(np_eff * (1.0 - p));
                const std::int64_t lo = std::max<std::int64_t>(0, mode - std::int64_t(45.0 * sd) - 4);
                const std::int64_t hi = std::min<std::int64_t>(n, mode + std::int64_t(45.0 * sd) + 4);
                const double log_mode = std::lgamma(double(n) + 1.0) -
                                        std::lgamma(double(mode) + 1.0) -
                                        std::lgamma(double(n - mode) + 1.0) +
                                        double(mode) * std::log(p) +
                                        double(n - mode) * std::log1p(-p);
                double tv = 0.0, prev = 0.0, cur = std::exp(log_mode);
                std::vector<double> pmf(std::size_t(hi - lo) + 1, 0.0);
                pmf[std::size_t(mode - lo)] = cur;
                for (std::int64_t j = mode; j > lo; --j)
                    pmf[std::size_t(j - 1 - lo)] =
                        pmf[std::size_t(j - lo)] * double(j) * (1.0 - p) / (double(n - j + 1) * p);
                for (std::int64_t j = mode; j < hi; ++j)
                    pmf[std::size_t(j + 1 - lo)] =
                        pmf[std::size_t(j - lo)] * double(n - j) * p / (double(j + 1) * (1.0 - p));
                for (std::size_t j = 0; j < pmf.size(); ++j) {
                    tv += std::fabs(pmf[j] - prev);
                    prev = pmf[j];
                }
                tv = 0.5 * (tv + prev);
                const double slack = tv - 2.0 * std::exp(-std::pow(np_eff, 1.5) / double(n));
                c = std::max(c, slack * std::pow(np_eff, 0.25));
            }
        }
        return c;
    }();
    return c8;
}

std::pair<int, int> maximal_coupling(const std::vector<double>& pmf_a,
                                     const std::vector<double>& pmf_b, const SiteRng& rng,
                                     std::uint64_t draw_key) {
    if (pmf_a.empty() || pmf_b.empty()) throw ConfigError("maximal_coupling: empty pmf");
    double sa = 0, sb = 0;
    for (double v : pmf_a) sa += v;
    for (double v : pmf_b) sb += v;
    if (std::fabs(sa - 1.0) > 1e-12 || std::fabs(sb - 1.0) > 1e-12)
        throw ConfigError("maximal_coupling: pmf not normalized");

    const std::size_t k = std::max(pmf_a.size(), pmf_b.size());
    double omega = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const double pa = j < pmf_a.size() ? pmf_a[j] : 0.0;
        const double pb = j < pmf_b.size() ? pmf_b[j] : 0.0;
        omega += std::min(pa, pb);
    }

    Site key = Site::zero(2);
    key.c[0] = std::int32_t(draw_key & 0x7fffffffu);
    key.c[1] = std::int32_t((draw_key >> 31) & 0x7fffffffu);
    double u1, u2;
    rng.uniform_pair(key, 0, u1, u2);

    const auto sample_from = [&](const auto& weight, double total, double u) {
        double acc = 0;
        for (std::size_t j = 0; j < k; ++j) {
            acc += weight(j);
            if (u * total <= acc) return int(j);
        }
        return int(k) - 1;
    };

    if (u1 <= omega) {
        // Shared overlap component.
        const int x = sample_from(
            [&](std::size_t j) {
                const double pa = j < pmf_a.size() ? pmf_a[j] : 0.0;
                const double pb = j < pmf_b.size() ? pmf_b[j] : 0.0;
                return std::min(pa, pb);
            },
            omega, u1 / omega);
        return {x, x};
    }
    // Residuals have disjoint supports, so the outputs always differ here.
    const double rest = 1.0 - omega;
    const int x = sample_from(
        [&](std::size_t j) {
            const double pa = j < pmf_a.size() ? pmf_a[j] : 0.0;
            const double pb = j < pmf_b.size() ? pmf_b[j] : 0.0;
            return std::max(0.0, pa - pb);
        },
        rest, (u1 - omega) / rest);
    const int y = sample_from(
        [&](std::size_t j) {
            const double pa = j < pmf_a.size() ? pmf_a[j] : 0.0;
            const double pb = j < pmf_b.size() ? pmf_b[j] : 0.0;
            return std::max(0.0, pb - pa);
        },
        rest, u2);
    return {x, y};
}

namespace {

// Coupled pair laws for annulus i: (identity target at i = 1, shift target
// beyond). Returns the two pmfs on a common support and the exact TV.
void annulus_pair_pmfs(int i, std::int64_t z, double r, std::vector<double>& pa,
                       std::vector<double>& pb) {
    if (i == 1) {
        pa = binomial_pmf(z > 0 ? z : 0, r);          // may be the point mass at 0
        if (z == 0) pa = std::vector<double>{1.0};
        pb = binomial_pmf(z + 1, r);
        pa.resize(std::max(pa.size(), pb.size()), 0.0);
        pb.resize(pa.size(), 0.0);
        return;
    }
    if (z == 0) {
        pa = {1.0, 0.0};
        pb = {0.0, 1.0};  // shifted point mass: disagreement is certain
        return;
    }
    const auto base = binomial_pmf(z, r);
    pa = base;
    pa.push_back(0.0);
    pb.assign(base.size() + 1, 0.0);
    for (std::size_t j = 0; j < base.size(); ++j) pb[j + 1] = base[j];
}

}  // namespace

CouplingTranscript run_coupling(const AnnulusDecomposition& ann, const MixtureTable& mix,
                                const SiteRng& rng) {
    if (int(mix.rows.size()) != ann.i_max) throw ConfigError("run_coupling: table/annuli mismatch");
    const int d = ann.dim;
    const int i_max = ann.i_max;

    CouplingTranscript tr;
    tr.i_max = i_max;
    tr.z.assign(std::size_t(i_max), 0);

    // Thinning field over all sites in the ball.
    const std::int64_t r_top = std::int64_t(1) << i_max;
    Site s = Site::zero(d);
    std::int32_t c[kMaxDim];
    for (int i = 0; i < d; ++i) c[i] = std::int32_t(-r_top);
    while (true) {
        for (int i = 0; i < d; ++i) s.c[i] = c[i];
        const int ai = ann.annulus_of(s);
        if (ai >= 1) {
            const double u = rng.uniform(s, 0);
            if (u < mix.rows[std::size_t(ai) - 1].p) {
                ++tr.z[std::size_t(ai) - 1];
                tr.zeta_sites.push_back(s);
            }
        }
        int i = d - 1;
        while (i >= 0 && c[i] == r_top) {
            c[i] = std::int32_t(-r_top);
            --i;
        }
        if (i < 0) break;
        ++c[i];
    }

    tr.zhat = tr.z;
    tr.zhat[0] += 1;

    tr.w.assign(std::size_t(i_max), 0);
    tr.what.assign(std::size_t(i_max), 0);
    tr.tv.assign(std::size_t(i_max), 0.0);
    std::vector<double> pa, pb;
    for (int i = 1; i <= i_max; ++i) {
        const double r = ann.annuli[std::size_t(i) - 1].r_ratio;
        annulus_pair_pmfs(i, tr.z[std::size_t(i) - 1], r, pa, pb);
        tr.tv[std::size_t(i) - 1] = total_variation(pa, pb);
        // Coupling draws live on their own stream so they cannot collide
        // with the site-keyed thinning field.
        const auto [x, y] =
            maximal_coupling(pa, pb, rng.with_stream(rng.stream + 7), 0xC0 + std::uint64_t(i));
        if (i == 1) {
            tr.w[0] = x;
            tr.what[0] = y;
        } else {
            tr.w[std::size_t(i) - 1] = x;
            tr.what[std::size_t(i) - 1] = y - 1;  // pb was the +1-shifted law
        }
    }

    tr.u.assign(std::size_t(i_max), 0);
    tr.uhat.assign(std::size_t(i_max), 0);
    tr.u[0] = tr.w[0];
    tr.uhat[0] = tr.what[0];
    for (int i = 2; i <= i_max; ++i) {
        tr.u[std::size_t(i) - 1] =
            tr.w[std::size_t(i) - 1] + tr.z[std::size_t(i) - 2] - tr.w[std::size_t(i) - 2];
        tr.uhat[std::size_t(i) - 1] =
            tr.what[std::size_t(i) - 1] + tr.zhat[std::size_t(i) - 2] - tr.what[std::size_t(i) - 2];
    }

    tr.success = true;
    for (int i = 1; i <= i_max - 1; ++i)
        tr.success = tr.success && tr.u[std::size_t(i) - 1] == tr.uhat[std::size_t(i) - 1];
    tr.success_full = tr.success && tr.u[std::size_t(i_max) - 1] == tr.uhat[std::size_t(i_max) - 1];

    tr.event_e = true;
    for (int i = 1; i <= i_max; ++i) {
        const double need = std::max(1.0, mix.c5 * std::pow(2.0, double(i) * (2.0 * d - mix.alpha)));
        tr.event_e = tr.event_e && double(tr.z[std::size_t(i) - 1]) >= need;
    }

    tr.cond_success_prob = 1.0;
    for (int i = 1; i <= i_max - 1; ++i) tr.cond_success_prob *= 1.0 - tr.tv[std::size_t(i) - 1];
    return tr;
}

double coupling_success_probability(const AnnulusDecomposition& ann, const MixtureTable& mix) {
    double prob = 1.0;
    std::vector<double> pa, pb;
    for (int i = 1; i <= ann.i_max - 1; ++i) {
        const Annulus& h = ann.annuli[std::size_t(i) - 1];
        const double p = mix.rows[std::size_t(i) - 1].p;
        const auto zdist = binomial_pmf(h.lattice_count, p);
        double agree = 0.0;
        for (std::size_t z = 0; z < zdist.size(); ++z) {
            if (zdist[z] < 1e-14) continue;
            annulus_pair_pmfs(i, std::int64_t(z), h.r_ratio, pa, pb);
            agree += zdist[z] * (1.0 - total_variation(pa, pb));
        }
        prob *= agree;
    }
    return prob;
}

}  // namespace plattice
