#include <doctest.h>

#include <cmath>
#include <vector>

#include "plattice/site_rng.hpp"
#include "plattice/stable.hpp"
#include "plattice/stats.hpp"
#include "test_support.hpp"

using namespace plattice;

TEST_CASE("closed-form cases: Cauchy and Gaussian") {
    CHECK(stable_density_std(1.0, 0.0).value == doctest::Approx(1.0 / 3.14159265358979).epsilon(1e-14));
    CHECK(stable_density_std(1.0, 2.0).value == doctest::Approx(1.0 / (3.14159265358979 * 5.0)).epsilon(1e-14));
    // alpha = 2 is N(0, 2)
    CHECK(stable_density_std(2.0, 0.0).value ==
          doctest::Approx(1.0 / std::sqrt(4.0 * 3.14159265358979)).epsilon(1e-14));
}

TEST_CASE("numeric density matches the quadrature oracle to 1e-6") {
    for (const double alpha : {0.7, 1.3, 1.5, 1.9}) {
        for (const double x : {0.0, 0.4, 1.0, 3.0, 8.0}) {
            const auto got = stable_density_std(alpha, x);
            const double want = testsup::stable_density_oracle(alpha, x);
            CHECK(got.accurate);
            CHECK(std::fabs(got.value - want) < 1e-6);
        }
    }
}

TEST_CASE("density is continuous across the series/integral switch") {
    for (const double alpha : {1.3, 1.7}) {
        const double lo = stable_density_std(alpha, 11.9).value;
        const double hi = stable_density_std(alpha, 12.1).value;
        CHECK(std::fabs(lo - hi) / lo < 0.05);  // smooth decay, no jump
        // against the tail series shape: f ~ C x^{-1-alpha}
        const double f60 = stable_density_std(alpha, 60.0).value;
        const double f120 = stable_density_std(alpha, 120.0).value;
        CHECK(f60 / f120 == doctest::Approx(std::pow(2.0, 1.0 + alpha)).epsilon(0.03));
    }
}

TEST_CASE("CMS sampler: alpha=2 gives variance 2, alpha=1 matches Cauchy quantiles") {
    const SiteRng rng(4242, 0);
    Site s = Site::zero(1);
    double sum2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        s.c[0] = i;
        double u1, u2;
        rng.uniform_pair(s, 0, u1, u2);
        const double x = stable_sample_std(2.0, u1, u2);
        sum2 += x * x;
    }
    CHECK(sum2 / n == doctest::Approx(2.0).epsilon(0.02));

    // Empirical CDF of Cauchy samples at a few quantiles.
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) {
        s.c[0] = i + n;
        double u1, u2;
        rng.uniform_pair(s, 0, u1, u2);
        xs.push_back(stable_sample_std(1.0, u1, u2));
    }
    for (const double q : {-5.0, -1.0, 0.0, 0.5, 3.0}) {
        double below = 0;
        for (const double x : xs) below += x <= q ? 1 : 0;
        CHECK(std::fabs(below / n - testsup::cauchy_cdf(q)) < 0.01);
    }
}

TEST_CASE("sampler tail exponent matches the stable tail") {
    const double alpha = 1.5;
    const SiteRng rng(515, 0);
    Site s = Site::zero(1);
    const int n = 400000;
    int over2 = 0, over8 = 0;
    for (int i = 0; i < n; ++i) {
        s.c[0] = i;
        double u1, u2;
        rng.uniform_pair(s, 0, u1, u2);
        const double x = std::fabs(stable_sample_std(alpha, u1, u2));
        over2 += x > 4 ? 1 : 0;
        over8 += x > 16 ? 1 : 0;
    }
    // P(>4)/P(>16) ~ 4^alpha = 8 for the asymptotic tail
    CHECK(double(over2) / double(over8) == doctest::Approx(std::pow(4.0, alpha)).epsilon(0.15));
    // Against the one-sided tail estimate
    CHECK(double(over8) / n ==
          doctest::Approx(2.0 * stable_tail_std(alpha, 16.0)).epsilon(0.1));
}
