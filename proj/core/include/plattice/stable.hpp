#pragma once

// Symmetric alpha-stable numerics: Chambers-Mallows-Stuck sampling and
// density evaluation by inversion of the characteristic function
// exp(-|t|^alpha). Closed forms short-circuit alpha = 1 (Cauchy) and
// alpha = 2 (Gaussian with variance 2).

namespace plattice {

struct StableDensity {
    double value = 0.0;
    bool accurate = true;  // false when the numeric path had to extrapolate
};

// Density of the standard (scale 1) symmetric alpha-stable law at x.
// Numeric target 1e-6 absolute away from closed-form cases.
StableDensity stable_density_std(double alpha, double x);

// One standard variate from two independent uniforms in (0,1).
double stable_sample_std(double alpha, double u1, double u2);

// One-sided tail P(X > x) for the standard law, exact for alpha in {1,2},
// otherwise the leading-order power tail (accurate for small tails).
double stable_tail_std(double alpha, double x);

}  // namespace plattice
