#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "qmem/analysis.hpp"
#include "qmem/sde.hpp"
#include "qmem/types.hpp"

namespace qmem {

/// Shortest decimal representation that round-trips the exact binary value.
std::string format_double(double x);

nlohmann::json params_to_json(const SimParams& params);

/// Strict parse: every field required, unknown keys are an error.
SimParams params_from_json(const nlohmann::json& j);

SimParams load_params(const std::filesystem::path& path);

/// Applies "key=value" to a parameter record; key must be a SimParams field.
SimParams apply_override(SimParams params, std::string_view assignment);

struct Preset {
    SimParams params;
    GaussianState init;
};

/// fig3a / fig3b / fig3c: the three measurement-strength regimes
/// (tau = 0.005, 0.2, 4) with the shared circuit parameters and the
/// displaced initial state (<phi> = 20, <q> = 0, vacuum variances).
Preset preset(std::string_view name);

GaussianState default_initial_state();
ClassicalState classical_from_quantum(const GaussianState& init);

void write_ensemble_csv(const std::filesystem::path& path, const EnsembleStats& stats);
EnsembleStats read_ensemble_csv(const std::filesystem::path& path);
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& record);
TrajectoryRecord read_trajectory_csv(const std::filesystem::path& path);
void write_classical_csv(const std::filesystem::path& path,
                         std::span<const ClassicalSample> samples);
void write_tau_scan_csv(const std::filesystem::path& path, const TauOptReport& report);
void write_convergence_csv(const std::filesystem::path& path, const ConvergenceReport& report);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace qmem
