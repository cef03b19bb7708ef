#pragma once

// Shared small-sample statistics: moments, quantiles, least squares,
// binomial confidence intervals, KS two-sample test, normal quantile.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace plattice {

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased, n-1
double std_error_of_mean(const std::vector<double>& v);

// Empirical p-quantile, lower interpolation (conservative for one-sided
// rejection thresholds: ties break toward fewer rejections).
double quantile(std::vector<double> v, double p);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
    std::size_t n = 0;
};
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

// Clopper-Pearson exact interval for a binomial proportion.
struct BinomCI {
    double lo = 0.0;
    double hi = 1.0;
};
BinomCI clopper_pearson(std::uint64_t successes, std::uint64_t trials, double conf = 0.95);

// Normal quantile Phi^{-1}(p), |error| < 1e-13 (Acklam + Halley refinement).
double normal_quantile(double p);
double normal_cdf(double x);

// Regularized incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a); used for
// chi-square tail oracles.
double gamma_q(double a, double x);

// Two-sample Kolmogorov-Smirnov: returns true when the hypothesis of a
// common distribution is NOT rejected at the given level.
bool ks_two_sample_pass(std::vector<double> a, std::vector<double> b, double level);

// Welford-style streaming accumulator.
class RunningStat {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / double(n_);
        m2_ += d * (x - mean_);
        if (x > max_) max_ = x;
        sum_ += x;
    }
    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / double(n_ - 1) : 0.0; }
    double std_error() const;
    double max() const { return max_; }
    double sum() const { return sum_; }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double max_ = -1.7e308;
    double sum_ = 0.0;
};

}  // namespace plattice
