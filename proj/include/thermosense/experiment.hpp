#pragma once

/**
 * @file experiment.hpp
 * @brief End-to-end experiment runs: dataset -> LSTM -> confusion matrix.
 *
 * An ExperimentSpec is a self-contained JSON document. Every field has a
 * default, and `resolved_spec_json` writes all of them back out so a run can
 * be repeated from its summary alone. The schema is documented in
 * docs/file-formats.md.
 */

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermosense/episodes.hpp"
#include "thermosense/lstm.hpp"
#include "thermosense/metrics.hpp"

namespace thermosense {

/// Spec validation failure naming the offending field.
class SpecError : public std::invalid_argument {
   public:
    SpecError(std::string field, const std::string& message);
    const std::string& field() const noexcept { return field_; }

   private:
    std::string field_;
};

struct ExperimentSpec {
    std::string name = "experiment";
    std::string notes;
    std::vector<std::string> materials;
    double material_temp = 43.0;  ///< C
    double device_temp = 23.0;    ///< C
    double duration = kDefaultDuration;
    double sample_rate = kDefaultSampleRate;
    double sensor_depth = kDefaultSensorDepth;
    double area = kDefaultArea;
    double device_conductivity = water_device().conductivity();
    double device_effusivity = water_device().effusivity();
    AugmentationSpec augmentation;
    double test_fraction = 0.2;
    std::uint64_t split_seed = 1;
    TrainConfig train;
    std::string output_dir;

    double delta_t() const noexcept { return device_temp - material_temp; }
    ThermalProps device() const;
    std::vector<ContactConfig> contact_configs() const;

    /// Throws SpecError on the first invalid field.
    void validate(const MaterialDb& db) const;
};

/// Reads a spec document; missing fields take defaults. `delta_t` may be
/// given instead of `device_temp` (device = material + delta_t).
ExperimentSpec parse_spec(const nlohmann::json& j);
ExperimentSpec load_spec(const std::filesystem::path& path);
/// Every field, defaults included.
nlohmann::json resolved_spec_json(const ExperimentSpec& spec);

struct ExperimentResult {
    ExperimentSpec spec;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    TrainResult training;
    ConfusionMatrix lstm;
    ConfusionMatrix centroid;  ///< nearest-centroid baseline on the same split
    double seconds = 0.0;
};

ExperimentResult run_experiment(const ExperimentSpec& spec, const MaterialDb& db);

nlohmann::json summary_json(const ExperimentResult& result);

/// Writes confusion.csv, centroid_confusion.csv, loss.csv, summary.json and
/// model.bin into `dir` (created if missing).
void write_experiment_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

struct SweepRow {
    std::string case_label;
    double delta_t = 0.0;  ///< |device - material|, C
    double accuracy = 0.0;
    double centroid_accuracy = 0.0;
};

/// Re-runs `base` at each |delta_t| with the material temperature fixed and
/// the device on the same side as in `base` (colder when base has equal
/// temperatures). Rows are labelled case_prefix + 'A', 'B', ...
/// Configurations run on up to `threads` workers; results do not depend on it.
std::vector<SweepRow> sweep_delta_t(const ExperimentSpec& base, const std::vector<double>& deltas,
                                    const MaterialDb& db, const std::string& case_prefix = "2-",
                                    unsigned threads = 1);

/// `case,delta_t_c,accuracy_pct,centroid_accuracy_pct`
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

struct FluxRow {
    std::string material;
    double delta_t = 0.0;  ///< device - material, C
    double area = 0.0;     ///< m^2
    double q_device = 0.0; ///< W, positive = heat leaving the device
    double surface_temp = 0.0;
};

/// Heat flow and contact temperature over a (delta_t, area) grid at time t,
/// with the material at `material_temp` and the device at material + delta_t.
std::vector<FluxRow> flux_surface(const std::vector<std::string>& materials,
                                  const std::vector<double>& deltas,
                                  const std::vector<double>& areas, double t,
                                  double material_temp, const ThermalProps& device,
                                  const MaterialDb& db);

/// `material,delta_t_c,area_m2,q_device_w,surface_temp_c`
void write_flux_csv(const std::vector<FluxRow>& rows, std::ostream& out);

}  // namespace thermosense
