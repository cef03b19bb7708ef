#pragma once

// Reproducible experiment runner: JSON config in, deterministic CSV/JSONL
// artifacts out, with a manifest echoing the resolved config. Identical
// config+seed produces byte-identical data files at any thread count.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "plattice/discriminators.hpp"
#include "plattice/law.hpp"
#include "plattice/process.hpp"

namespace plattice {

struct LawConfig {
    PerturbationLaw law;
    std::uint64_t seed = 0;
    std::uint32_t stream = 0;
};

LawConfig parse_law(const nlohmann::json& j);
nlohmann::json law_to_json(const LawConfig& lc);

// Window; margin omitted or negative selects the p = 1e-6 quantile rule for
// the given law (budget-capped for heavy tails).
Window parse_window(const nlohmann::json& j, const PerturbationLaw& margin_law);

ProcessSpec parse_process_spec(const nlohmann::json& j, const LawConfig& base);
ScheduleSpec parse_schedule(const nlohmann::json& j);

// Dispatches config["command"], writes manifest.json / results.csv /
// raw.jsonl (and summary.json where the command defines one) under out_dir.
// Returns a process exit status; validation problems throw ConfigError.
int run_experiment(nlohmann::json config, const std::string& out_dir);

}  // namespace plattice
