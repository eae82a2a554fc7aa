#pragma once

#include "pwu/patched_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace pwu {

inline constexpr int kModelFormatVersion = 1;

/// JSON model file. Doubles are written in shortest round-trip form, so
/// save -> load -> save is byte-stable. Supports that remember the gate
/// pattern they came from are stored as pattern bits and rebuilt from the
/// base weights; others are stored as explicit rows.
std::string model_to_json(const PatchedModel& model,
                          const nlohmann::json& training = nlohmann::json::object());
PatchedModel model_from_json(const std::string& text, nlohmann::json* training = nullptr);

void save_model(const PatchedModel& model, const std::filesystem::path& path,
                const nlohmann::json& training = nlohmann::json::object());
PatchedModel load_model(const std::filesystem::path& path, nlohmann::json* training = nullptr);

/// Bits packed four per hex digit, most significant first.
std::string pack_bits(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> unpack_bits(const std::string& hex, std::size_t count);

} // namespace pwu
