#pragma once

// Statistics that tell Pi from Pi_S on blinded configurations: the
// triangular-kernel statistic Psi_m and its schedule average, the deleted
// mass estimator, the sibling-pairing statistic for doubled lattices, and
// the calibrated power-experiment harness around them.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "plattice/common.hpp"
#include "plattice/greedy.hpp"
#include "plattice/process.hpp"

namespace plattice {

struct ScheduleSpec {
    enum class Kind { paper, geometric };
    Kind kind = Kind::geometric;
    int length = 1;
    double m0 = 1.0;  // geometric: m_l = m0 * 2^l; paper: m_l = e^{2 l^2}

    // Values that fit the window (m <= radius); sets truncated when clipped.
    std::vector<double> m_values(double window_radius, bool* truncated = nullptr) const;
};

// (1/m) sum_z max(m - |z|, 0); one-dimensional configurations only.
double psi(const PointConfiguration& config, double m);

double psi_schedule_average(const PointConfiguration& config, const ScheduleSpec& schedule);

struct NullMeanCurve {
    std::vector<double> m;
    std::vector<double> mean;  // E Psi_m under the null spec
    int replicates = 0;
};

NullMeanCurve estimate_null_mean_curve(const ProcessSpec& null_spec, const Window& window,
                                       const ScheduleSpec& schedule, int replicates,
                                       std::uint64_t seed, int threads = 1);

// (1/n) sum_l (null_mean(m_l) - Psi_{m_l}(config)); estimates |S| for
// heavy-tailed deletions.
double deleted_mass_estimator(const PointConfiguration& config, const NullMeanCurve& curve,
                              const ScheduleSpec& schedule);

struct PairingStat {
    std::int64_t unpaired_interior = 0;
    std::vector<double> pair_distance_quantiles;  // 50/90/99% of matched distances
};

// Greedy mutual-nearest-neighbor pairing at the given radius; counts interior
// points left unpaired (boundary shell excluded).
PairingStat sibling_pairing_stat(const PointConfiguration& config, double pairing_radius,
                                 double boundary_shell = 1.0);

// A named blinded-configuration statistic; larger values must indicate the
// alternative for the one-sided threshold rule.
struct Statistic {
    std::string name;
    std::function<double(const PointConfiguration&)> eval;
};

Statistic make_chain_statistic(int n_chain, const ChainOptions& opt = {});
Statistic make_pairing_statistic(double pairing_radius, double boundary_shell = 1.0);
// Deleted-mass orientation of the Psi schedule statistic; the null mean
// curve is estimated here with its own replicate budget and disjoint seeds.
Statistic make_deleted_mass_statistic(const ProcessSpec& null_spec, const Window& window,
                                      const ScheduleSpec& schedule, int curve_replicates,
                                      std::uint64_t seed, int threads = 1);

struct TestReport {
    std::string statistic;
    std::string null_desc;
    std::string alt_desc;
    int replicates = 0;
    double alpha_level = 0.05;
    double threshold = 0.0;
    double level_hat = 0.0;  // rejection rate on held-out null replicates
    double level_ci_lo = 0.0, level_ci_hi = 0.0;
    double power = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
};

// Calibrates the one-sided threshold at 1 - alpha on fresh null replicates
// (ties conservative), then evaluates held-out level and power; all three
// replicate banks use disjoint seeds.
TestReport power_experiment(const ProcessSpec& null_spec, const ProcessSpec& alt_spec,
                            const Statistic& statistic, const Window& window, int replicates,
                            double alpha_level, std::uint64_t seed, int threads = 1);

}  // namespace plattice
