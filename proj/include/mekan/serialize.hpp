#pragma once

#include "mekan/network.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace mekan {

inline constexpr int kModelFormatVersion = 1;

/// Shape, mode, and every activation's grid, base kind and coefficients.
/// Doubles are written in shortest round-trip form, so save/load is exact.
nlohmann::json model_to_json(const MultiExitKan& model);
MultiExitKan model_from_json(const nlohmann::json& doc);

void save_model(const MultiExitKan& model, const std::filesystem::path& path);
MultiExitKan load_model(const std::filesystem::path& path);

/// act_L{layer}_J{j}_I{i}.csv for trunk activations, act_exit{k}_J{j}_I{i}.csv for exits.
std::string activation_file_name(const ActivationSite& site);

/// One (x, phi_x) CSV per activation sampled uniformly over its grid domain,
/// plus index.csv mapping file names to sites. Returns the activation file names.
std::vector<std::string> export_activations(const MultiExitKan& model, const std::filesystem::path& out_dir,
                                            int samples_per_act);

}  // namespace mekan
