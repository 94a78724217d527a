#pragma once

// JSON mappings shared by dataset files and experiment spec files.

#include <json.hpp>

#include "thermosense/episodes.hpp"

namespace thermosense {

void to_json(nlohmann::json& j, const ContactConfig& c);
void from_json(const nlohmann::json& j, ContactConfig& c);

void to_json(nlohmann::json& j, const AugmentationSpec& a);
/// Missing keys keep their current (default) values.
void from_json(const nlohmann::json& j, AugmentationSpec& a);

void to_json(nlohmann::json& j, const TemperatureTrace& t);
void from_json(const nlohmann::json& j, TemperatureTrace& t);

/// Value of an optional key, or `fallback`.
template <typename T>
T value_or(const nlohmann::json& j, const char* key, T fallback) {
    const auto it = j.find(key);
    return it == j.end() ? fallback : it->template get<T>();
}

}  // namespace thermosense
