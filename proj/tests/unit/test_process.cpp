#include <doctest.h>

#include <cmath>
#include <unordered_set>

#include "plattice/parallel.hpp"
#include "plattice/process.hpp"
#include "plattice/stats.hpp"
#include "test_support.hpp"

using namespace plattice;

namespace {

ProcessSpec gaussian_spec(double sigma, int d, double eps = 1.0) {
    ProcessSpec spec;
    spec.law = PerturbationLaw::make_gaussian(sigma, d, eps);
    return spec;
}

}  // namespace

TEST_CASE("vanishing perturbation keeps every site's point in its cell") {
    const auto spec = gaussian_spec(1e-6, 2);
    Window w;
    w.dim = 2;
    w.radius = 4;
    w.margin = 1;
    const auto cfg = realize(spec, w, SiteRng(5, 0));
    CHECK(cfg.size() == 81);  // (2R+1)^d exactly
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const double* p = cfg.point(i);
        const Site& s = cfg.prov_site[i];
        for (int k = 0; k < 2; ++k) CHECK(std::fabs(p[k] - s.c[k]) < 1e-4);
    }
}

TEST_CASE("deleting a site removes exactly its point (shared randomness)") {
    const auto spec = gaussian_spec(0.8, 2);
    Window w;
    w.dim = 2;
    w.radius = 6;
    w.margin = 2;
    const SiteRng rng(77, 0);
    const auto full = realize(spec, w, rng);
    const auto del = realize(delete_sites(spec, {Site::zero(2)}), w, rng);

    // Symmetric difference is exactly the retained point of site 0.
    std::unordered_set<std::string> a, b;
    const auto key = [](const double* p, int d) {
        std::string k;
        for (int i = 0; i < d; ++i) k += std::to_string(p[i]) + "|";
        return k;
    };
    for (std::size_t i = 0; i < full.size(); ++i) a.insert(key(full.point(i), 2));
    for (std::size_t i = 0; i < del.size(); ++i) b.insert(key(del.point(i), 2));
    CHECK(full.size() == del.size() + 1);
    int missing = 0;
    for (const auto& k : a) missing += b.count(k) ? 0 : 1;
    CHECK(missing == 1);

    // delete twice == delete union; empty deletion is the identity
    const auto spec2 = delete_sites(delete_sites(spec, {Site::zero(2)}), {Site::zero(2)});
    CHECK(spec2.deleted_sites.size() == 1);
    const auto same = delete_sites(spec, {});
    CHECK(same.deleted_sites.empty());
}

TEST_CASE("deterministic realization is byte-identical") {
    const auto spec = gaussian_spec(1.0, 3);
    Window w;
    w.dim = 3;
    w.radius = 3;
    w.margin = 2;
    const auto c1 = realize(spec, w, SiteRng(123, 0));
    const auto c2 = realize(spec, w, SiteRng(123, 0));
    CHECK(to_jsonl(c1) == to_jsonl(c2));
}

TEST_CASE("site budget is enforced with the offending count") {
    Window w;
    w.dim = 3;
    w.radius = 500;
    w.margin = 0;
    w.site_budget = 1000;
    CHECK_THROWS_AS(w.site_count_checked(), ResourceError);
}

TEST_CASE("margin rule: quantile margins and heavy-tail truncation flag") {
    const auto g = PerturbationLaw::make_gaussian(1.0, 1);
    const auto mg = margin_by_quantile(g, 100, 1);
    // smallest M with 2*Phi_bar(M) <= 1e-6 is 5
    CHECK(mg.margin == 5);
    CHECK_FALSE(mg.truncated);

    const auto cauchy = PerturbationLaw::make_stable(1.0, 1.0);
    const auto mc = margin_by_quantile(cauchy, 1000, 1);
    CHECK_FALSE(mc.truncated);
    CHECK(mc.margin == 636620);

    const auto pt = PerturbationLaw::make_power_tail(1.5, 1);
    const auto mp = margin_by_quantile(pt, 1000, 1, 1e-6, 1ull << 20);
    CHECK(mp.truncated);  // quantile margin far beyond any budget
    CHECK(mp.margin > 0);
}

TEST_CASE("boundary control: tail-sum oracle under the quantile margin") {
    // Expected misclassified (immigrant) points: sum over sites beyond the
    // simulated box of P(x + Y lands inside the window box).
    struct LawCdf {
        PerturbationLaw law;
        std::function<double(double)> cdf;
    };
    const std::vector<LawCdf> laws{
        {PerturbationLaw::make_gaussian(2.0, 1),
         [](double t) { return 0.5 * std::erfc(-t / (2.0 * std::sqrt(2.0))); }},
        {PerturbationLaw::make_stable(1.0, 1.0), [](double t) { return testsup::cauchy_cdf(t); }},
        {PerturbationLaw::make_stable(2.0, 1.0),
         [](double t) { return 0.5 * std::erfc(-t / 2.0); }}};  // alpha=2 is N(0,2)
    for (const auto& lc : laws) {
        const std::int64_t R = 100;
        const auto m = margin_by_quantile(lc.law, R, 1, 1e-6, 1ull << 40);
        REQUIRE_FALSE(m.truncated);
        const double b = double(R) + 0.5;
        double expected = 0;
        for (std::int64_t x = R + m.margin + 1; x < R + m.margin + 30000000; ++x) {
            const double p = lc.cdf(b - double(x)) - lc.cdf(-b - double(x));
            expected += 2.0 * p;
            if (p < 1e-14 * std::max(1.0, expected)) break;
        }
        CHECK(expected < 1e-2);
    }
}

TEST_CASE("escaped points match the Cauchy tail-sum oracle") {
    const std::int64_t R = 1000;
    ProcessSpec spec;
    spec.law = PerturbationLaw::make_stable(1.0, 1.0);
    Window w;
    w.dim = 1;
    w.radius = R;
    w.margin = margin_by_quantile(spec.law, R, 1).margin;

    // Oracle: E[escaped] = sum_{|x| <= R} P(|x + Y| > R + 1/2).
    double expected = 0;
    for (std::int64_t x = -R; x <= R; ++x) {
        const double b = double(R) + 0.5;
        expected += testsup::cauchy_cdf(-b - double(x)) + 1.0 - testsup::cauchy_cdf(b - double(x));
    }

    const int reps = 300;
    std::vector<double> escaped(reps);
    parallel_for(reps, 4, [&](std::uint64_t r) {
        const auto cfg = realize(spec, w, SiteRng(derive_seed(900, r), 0));
        std::uint64_t inside = 0;
        for (std::size_t i = 0; i < cfg.size(); ++i)
            if (std::abs(std::int64_t(cfg.prov_site[i].c[0])) <= R) ++inside;
        escaped[r] = double(2 * R + 1) - double(inside);
    });
    const double got = mean(escaped);
    const double se = std_error_of_mean(escaped);
    CHECK(std::fabs(got - expected) < 4.0 * se + 1e-9);
}

TEST_CASE("insert_uniform appends k points with uniform law") {
    const auto spec = gaussian_spec(0.5, 2);
    Window w;
    w.dim = 2;
    w.radius = 5;
    w.margin = 1;
    auto cfg = realize(spec, w, SiteRng(3, 0));
    const std::size_t before = cfg.size();
    Box v{{-2.0, -1.0}, {2.0, 3.0}};

    const auto same = insert_uniform(cfg, v, 0, SiteRng(4, 0));
    CHECK(same.size() == before);

    const auto more = insert_uniform(cfg, v, 3, SiteRng(4, 0));
    CHECK(more.size() == before + 3);
    CHECK(more.prov_layer[before] == -1);

    Box degenerate{{0.0, 0.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(insert_uniform(cfg, degenerate, 1, SiteRng(4, 0)), ConfigError);

    // Empirical mean of inserted points over replicates ~ box center.
    double mx = 0, my = 0;
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) {
        PointConfiguration empty;
        empty.dim = 2;
        empty.radius = 5.5;
        const auto one = insert_uniform(empty, v, 1, SiteRng(derive_seed(8, r), 0));
        mx += one.point(0)[0] / reps;
        my += one.point(0)[1] / reps;
    }
    CHECK(std::fabs(mx - 0.0) < 4.0 * (4.0 / std::sqrt(12.0 * reps)));
    CHECK(std::fabs(my - 1.0) < 4.0 * (4.0 / std::sqrt(12.0 * reps)));
}

TEST_CASE("doubled lattice: sibling and marginal variances, degenerate delta") {
    Window w;
    w.dim = 3;
    w.radius = 10;
    w.margin = 8;
    const double sigma = 2.0, delta = 0.3;
    const auto cfg = realize_doubled(sigma, delta, w, SiteRng(11, 0));

    // Group points by site, compute per-coordinate stats of siblings.
    std::vector<double> sib_diff, marginal;
    std::unordered_map<Site, std::vector<std::size_t>, SiteHash> by_site;
    for (std::size_t i = 0; i < cfg.size(); ++i) by_site[cfg.prov_site[i]].push_back(i);
    for (const auto& [site, idx] : by_site) {
        if (idx.size() != 2) continue;
        for (int k = 0; k < 3; ++k) {
            sib_diff.push_back(cfg.point(idx[0])[k] - cfg.point(idx[1])[k]);
            marginal.push_back(cfg.point(idx[0])[k] - double(site.c[k]));
        }
    }
    REQUIRE(sib_diff.size() > 10000);
    CHECK(variance(sib_diff) == doctest::Approx(2.0 * delta * delta).epsilon(0.05));
    CHECK(variance(marginal) == doctest::Approx(sigma * sigma).epsilon(0.05));

    // delta -> 0: siblings coincide
    const auto tight = realize_doubled(3.0, 1e-8, w, SiteRng(12, 0));
    std::unordered_map<Site, std::vector<std::size_t>, SiteHash> by_site2;
    for (std::size_t i = 0; i < tight.size(); ++i) by_site2[tight.prov_site[i]].push_back(i);
    for (const auto& [site, idx] : by_site2) {
        if (idx.size() != 2) continue;
        for (int k = 0; k < 3; ++k)
            CHECK(std::fabs(tight.point(idx[0])[k] - tight.point(idx[1])[k]) < 1e-6);
    }

    CHECK_THROWS_AS(realize_doubled(1.0, 1.5, w, SiteRng(1, 0)), ConfigError);
}

TEST_CASE("doubled deletion removes exactly the named layer") {
    Window w;
    w.dim = 2;
    w.radius = 4;
    w.margin = 3;
    const SiteRng rng(21, 0);
    const auto full = realize_doubled(1.0, 0.2, w, rng);
    const auto del = realize_doubled(1.0, 0.2, w, rng, {{Site::zero(2), 1}});
    CHECK(full.size() == del.size() + 1);
}

TEST_CASE("layer-swap exchangeability (two-sample KS on first coordinates)") {
    Window w;
    w.dim = 2;
    w.radius = 8;
    w.margin = 6;
    std::vector<double> layer1, layer2;
    const auto cfg = realize_doubled(1.5, 0.4, w, SiteRng(31, 0));
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const double off = cfg.point(i)[0] - double(cfg.prov_site[i].c[0]);
        (cfg.prov_layer[i] == 1 ? layer1 : layer2).push_back(off);
    }
    CHECK(ks_two_sample_pass(layer1, layer2, 0.01));
}

TEST_CASE("blinding: no provenance bytes in the serialized form") {
    const auto spec = gaussian_spec(0.5, 2);
    Window w;
    w.dim = 2;
    w.radius = 3;
    w.margin = 1;
    const auto cfg = realize(spec, w, SiteRng(51, 0));
    const auto text = to_jsonl(cfg.blind());
    CHECK(text.find("site") == std::string::npos);
    CHECK(text.find("layer") == std::string::npos);
    CHECK(text.find("coords") != std::string::npos);

    // Round trip keeps points and stays blinded.
    const auto back = from_jsonl(text, 2, cfg.radius);
    CHECK(back.blinded);
    CHECK(back.size() == cfg.size());
}
