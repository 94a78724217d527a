#pragma once

/**
 * @file materials.hpp
 * @brief Material property database.
 *
 * Records are stored in a line-oriented text file, one `[material]` block per
 * record with `key = value` fields. See docs/file-formats.md for the grammar.
 */

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "thermosense/contact.hpp"

namespace thermosense {

struct MaterialRecord {
    std::string name;
    double conductivity = 0.0;  ///< W/(m K)
    double effusivity = 0.0;    ///< J/(m^2 s^1/2 K)
    std::string source;

    friend bool operator==(const MaterialRecord&, const MaterialRecord&) = default;
};

/// Diffusivity follows as conductivity^2 / effusivity^2.
ThermalProps to_thermal_props(const MaterialRecord& record);

class MaterialDbError : public std::runtime_error {
   public:
    MaterialDbError(const std::string& origin, std::size_t line, const std::string& message);

    std::size_t line() const noexcept { return line_; }

   private:
    std::size_t line_;
};

/// Immutable, ordered collection of uniquely named materials.
class MaterialDb {
   public:
    /// Throws MaterialDbError on a duplicate (case-insensitive) name or a
    /// non-positive property.
    explicit MaterialDb(std::vector<MaterialRecord> records);

    const std::vector<MaterialRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }

    /// Case-insensitive lookup.
    const MaterialRecord* find(std::string_view name) const;
    /// Like find() but throws std::out_of_range for an unknown name.
    const MaterialRecord& at(std::string_view name) const;

    friend bool operator==(const MaterialDb&, const MaterialDb&) = default;

   private:
    std::vector<MaterialRecord> records_;
};

/// Parses database text; `origin` is used in diagnostics.
MaterialDb parse_db(std::string_view text, const std::string& origin = "<memory>");
MaterialDb load_db(const std::filesystem::path& path);

std::string format_db(const MaterialDb& db);
void write_db(const MaterialDb& db, const std::filesystem::path& path);

/// The five-material table compiled into the library (copper, zinc, brass,
/// iron, wood).
const MaterialDb& bundled_db();
std::string_view bundled_db_text();

bool iequals(std::string_view a, std::string_view b);

}  // namespace thermosense
