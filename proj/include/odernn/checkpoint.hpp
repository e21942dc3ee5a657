#pragma once

#include <string>

#include "json.hpp"
#include "odernn/training.hpp"

namespace odernn {

inline constexpr int kCheckpointVersion = 1;

/// Self-describing JSON: version, model kind, dims, flags, every parameter
/// tensor by name (shape + flat values), the config that produced it, and the
/// final objective value. Round-trips bit-exactly.
nlohmann::json checkpoint_to_json(const Model& model, const nlohmann::json& run_config,
                                  double final_loss);
void save_checkpoint(const Model& model, const nlohmann::json& run_config, double final_loss,
                     const std::string& path);

struct LoadedCheckpoint {
    Model model;
    nlohmann::json run_config;
    double final_loss = 0.0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace odernn
