#pragma once

#include <filesystem>
#include <string>

#include "ppgd/train.hpp"

namespace ppgd {

/// Model document:
///   {"d", "r", "K", "beta", "outer": [a_0..a_M], "inner": [[b_k0..b_kd], ...],
///    "penalized_risk", "config": {...}}
/// Numbers are written in shortest round-trip form, so load(save(m)) restores
/// every weight bit for bit.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace ppgd
