#pragma once

/**
 * @file episodes.hpp
 * @brief Synthetic grasp episodes and augmented datasets.
 *
 * An episode is the device-sensor temperature recorded while the device,
 * regulated to `device_initial`, holds a block of material at
 * `material_initial`. One clean episode per class is synthesized from the
 * closed-form contact model and then multiplied by the augmentation step
 * (per-sample Gaussian noise plus a per-trace constant offset).
 */

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermosense/contact.hpp"
#include "thermosense/materials.hpp"

namespace thermosense {

inline constexpr double kDefaultSensorDepth = 2.5e-4;  // m
inline constexpr double kDefaultDuration = 10.0;       // s
inline constexpr double kDefaultSampleRate = 10.0;     // Hz
inline constexpr double kDefaultArea = 4e-4;           // m^2, 2 cm x 2 cm block

struct ContactConfig {
    std::string material;
    double material_initial = 43.0;  ///< C
    double device_initial = 23.0;    ///< C
    double sensor_depth = kDefaultSensorDepth;
    double duration = kDefaultDuration;
    double sample_rate = kDefaultSampleRate;
    double area = kDefaultArea;

    double delta_t() const noexcept { return device_initial - material_initial; }

    /// Throws DomainError naming the offending field.
    void validate() const;

    friend bool operator==(const ContactConfig&, const ContactConfig&) = default;
};

struct TemperatureTrace {
    std::string label;
    std::vector<double> samples;  ///< C
    double dt = 0.0;              ///< s
    ContactConfig meta;

    friend bool operator==(const TemperatureTrace&, const TemperatureTrace&) = default;
};

struct AugmentationSpec {
    double noise_sigma = 0.5;      ///< C, per-sample Gaussian
    double shift_range = 0.075;    ///< C, half-width of the uniform per-trace offset
    std::size_t multiplier = 100;  ///< traces produced per base episode
    std::uint64_t rng_seed = 1;

    void validate() const;

    friend bool operator==(const AugmentationSpec&, const AugmentationSpec&) = default;
};

struct Dataset {
    std::vector<TemperatureTrace> train;
    std::vector<TemperatureTrace> test;
    std::vector<std::string> class_names;
    std::uint64_t split_seed = 0;
    double test_fraction = 0.2;
    AugmentationSpec augmentation;
    std::vector<ContactConfig> configs;  ///< one per class, in class order
    double device_conductivity = 0.0;
    double device_effusivity = 0.0;

    std::size_t size() const noexcept { return train.size() + test.size(); }
    /// Index of `label` in class_names, or -1.
    int class_index(std::string_view label) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

class UnknownMaterial : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

class DatasetFormatError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Clean (noise-free) device-sensor trace for one contact. The label is the
/// database's spelling of the material name.
TemperatureTrace synthesize_episode(const ContactConfig& cfg, const MaterialDb& db,
                                    const ThermalProps& device);

/// spec.multiplier noisy copies of `base`. Copy j draws from the random
/// stream (spec.rng_seed, first_stream + j).
std::vector<TemperatureTrace> augment(const TemperatureTrace& base, const AugmentationSpec& spec,
                                      std::uint64_t first_stream = 0);

/// One base episode per class, augmented, then split per class so that
/// round(test_fraction * multiplier) copies of every class go to the test set.
Dataset build_dataset(const std::vector<ContactConfig>& classes, const MaterialDb& db,
                      const ThermalProps& device, const AugmentationSpec& spec,
                      double test_fraction, std::uint64_t split_seed);

inline constexpr int kDatasetFormatVersion = 1;

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
/// Throws DatasetFormatError on malformed, truncated or wrong-version input.
Dataset load_dataset(const std::filesystem::path& path);

/// `# key = value` header block followed by `time_s,temperature_c` rows.
void write_trace_csv(const TemperatureTrace& trace, std::ostream& out);

}  // namespace thermosense
