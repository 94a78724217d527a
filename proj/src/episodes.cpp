#include "thermosense/episodes.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "serialization.hpp"
#include "thermosense/random.hpp"

namespace thermosense {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw DomainError(message);
}

}  // namespace

void ContactConfig::validate() const {
    require(!material.empty(), "material: name is empty");
    require(std::isfinite(material_initial) && material_initial >= kAbsoluteZeroC,
            "material_initial: not a valid temperature");
    require(std::isfinite(device_initial) && device_initial >= kAbsoluteZeroC,
            "device_initial: not a valid temperature");
    require(std::isfinite(sensor_depth) && sensor_depth >= 0.0, "sensor_depth: must be >= 0");
    require(std::isfinite(duration) && duration > 0.0, "duration: must be > 0");
    require(std::isfinite(sample_rate) && sample_rate > 0.0, "sample_rate: must be > 0");
    require(std::isfinite(area) && area > 0.0, "area: must be > 0");
}

void AugmentationSpec::validate() const {
    require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, "noise_sigma: must be >= 0");
    require(std::isfinite(shift_range) && shift_range >= 0.0, "shift_range: must be >= 0");
    require(multiplier >= 1, "multiplier: must be >= 1");
}

int Dataset::class_index(std::string_view label) const {
    for (std::size_t i = 0; i < class_names.size(); ++i) {
        if (class_names[i] == label) return static_cast<int>(i);
    }
    return -1;
}

TemperatureTrace synthesize_episode(const ContactConfig& cfg, const MaterialDb& db,
                                    const ThermalProps& device) {
    cfg.validate();
    const auto* record = db.find(cfg.material);
    if (!record) throw UnknownMaterial("unknown material '" + cfg.material + "'");

    TemperatureTrace trace;
    trace.label = record->name;
    trace.dt = 1.0 / cfg.sample_rate;
    trace.meta = cfg;
    trace.meta.material = record->name;
    trace.samples =
        device_sensor_response(device, to_thermal_props(*record), cfg.device_initial,
                               cfg.material_initial, cfg.sensor_depth, cfg.duration,
                               cfg.sample_rate);
    return trace;
}

std::vector<TemperatureTrace> augment(const TemperatureTrace& base, const AugmentationSpec& spec,
                                      std::uint64_t first_stream) {
    spec.validate();
    std::vector<TemperatureTrace> out;
    out.reserve(spec.multiplier);
    for (std::size_t j = 0; j < spec.multiplier; ++j) {
        auto eng = make_stream(spec.rng_seed, first_stream + j);
        TemperatureTrace copy = base;
        // Offset first, then per-sample noise, so the draw order is fixed.
        const double offset = spec.shift_range > 0.0
                                  ? uniform(eng, -spec.shift_range, spec.shift_range)
                                  : 0.0;
        for (auto& v : copy.samples) {
            const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * standard_normal(eng)
                                                        : 0.0;
            v += offset + noise;
        }
        out.push_back(std::move(copy));
    }
    return out;
}

Dataset build_dataset(const std::vector<ContactConfig>& classes, const MaterialDb& db,
                      const ThermalProps& device, const AugmentationSpec& spec,
                      double test_fraction, std::uint64_t split_seed) {
    if (classes.size() < 2) throw DomainError("build_dataset: need at least two classes");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw DomainError("test_fraction: must lie strictly between 0 and 1");
    }
    spec.validate();

    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(spec.multiplier)));
    if (n_test == 0 || n_test >= spec.multiplier) {
        throw DomainError("test_fraction leaves an empty train or test split per class");
    }

    Dataset ds;
    ds.split_seed = split_seed;
    ds.test_fraction = test_fraction;
    ds.augmentation = spec;
    ds.device_conductivity = device.conductivity();
    ds.device_effusivity = device.effusivity();

    std::size_t length = 0;
    for (std::size_t k = 0; k < classes.size(); ++k) {
        auto base = synthesize_episode(classes[k], db, device);
        for (const auto& name : ds.class_names) {
            if (iequals(name, base.label)) {
                throw DomainError("build_dataset: material '" + base.label + "' listed twice");
            }
        }
        if (k == 0) length = base.samples.size();
        if (base.samples.size() != length) {
            throw DomainError("build_dataset: classes produce traces of different length");
        }
        ds.class_names.push_back(base.label);
        ds.configs.push_back(base.meta);

        auto copies = augment(base, spec, static_cast<std::uint64_t>(k) * spec.multiplier);
        std::vector<std::size_t> order(copies.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        auto eng = make_stream(split_seed, k);
        shuffle(std::span<std::size_t>(order), eng);
        for (std::size_t i = 0; i < order.size(); ++i) {
            auto& dest = i < n_test ? ds.test : ds.train;
            dest.push_back(std::move(copies[order[i]]));
        }
    }
    return ds;
}

// --- JSON mapping -----------------------------------------------------------

void to_json(json& j, const ContactConfig& c) {
    j = json{{"material", c.material},       {"material_initial", c.material_initial},
             {"device_initial", c.device_initial}, {"sensor_depth", c.sensor_depth},
             {"duration", c.duration},       {"sample_rate", c.sample_rate},
             {"area", c.area}};
}

void from_json(const json& j, ContactConfig& c) {
    c.material = j.at("material").get<std::string>();
    c.material_initial = j.at("material_initial").get<double>();
    c.device_initial = j.at("device_initial").get<double>();
    c.sensor_depth = value_or(j, "sensor_depth", kDefaultSensorDepth);
    c.duration = value_or(j, "duration", kDefaultDuration);
    c.sample_rate = value_or(j, "sample_rate", kDefaultSampleRate);
    c.area = value_or(j, "area", kDefaultArea);
}

void to_json(json& j, const AugmentationSpec& a) {
    j = json{{"noise_sigma", a.noise_sigma},
             {"shift_range", a.shift_range},
             {"multiplier", a.multiplier},
             {"rng_seed", a.rng_seed}};
}

void from_json(const json& j, AugmentationSpec& a) {
    a.noise_sigma = value_or(j, "noise_sigma", a.noise_sigma);
    a.shift_range = value_or(j, "shift_range", a.shift_range);
    a.multiplier = value_or(j, "multiplier", a.multiplier);
    a.rng_seed = value_or(j, "rng_seed", a.rng_seed);
}

void to_json(json& j, const TemperatureTrace& t) {
    j = json{{"label", t.label}, {"dt", t.dt}, {"meta", t.meta}, {"samples", t.samples}};
}

void from_json(const json& j, TemperatureTrace& t) {
    t.label = j.at("label").get<std::string>();
    t.dt = j.at("dt").get<double>();
    t.meta = j.at("meta").get<ContactConfig>();
    t.samples = j.at("samples").get<std::vector<double>>();
}

namespace {

constexpr const char* kDatasetTag = "thermosense-dataset";

void check_loaded(const Dataset& ds) {
    if (ds.class_names.empty()) throw DatasetFormatError("dataset has no classes");
    if (ds.configs.size() != ds.class_names.size()) {
        throw DatasetFormatError("dataset configs do not match class list");
    }
    std::size_t length = 0;
    bool first = true;
    for (const auto* split : {&ds.train, &ds.test}) {
        for (const auto& t : *split) {
            if (ds.class_index(t.label) < 0) {
                throw DatasetFormatError("trace label '" + t.label + "' is not a dataset class");
            }
            if (t.samples.size() < 2) throw DatasetFormatError("trace with fewer than 2 samples");
            for (double v : t.samples) {
                if (!std::isfinite(v)) throw DatasetFormatError("non-finite sample");
            }
            if (first) length = t.samples.size();
            first = false;
            if (t.samples.size() != length) {
                throw DatasetFormatError("traces within a dataset differ in length");
            }
        }
    }
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    json j;
    j["format"] = kDatasetTag;
    j["version"] = kDatasetFormatVersion;
    j["class_names"] = ds.class_names;
    j["split_seed"] = ds.split_seed;
    j["test_fraction"] = ds.test_fraction;
    j["augmentation"] = ds.augmentation;
    j["device"] = {{"conductivity", ds.device_conductivity},
                   {"effusivity", ds.device_effusivity}};
    j["configs"] = ds.configs;
    j["train"] = ds.train;
    j["test"] = ds.test;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetFormatError("cannot open '" + path.string() + "' for writing");
    out << j.dump() << '\n';
    if (!out) throw DatasetFormatError("write to '" + path.string() + "' failed");
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetFormatError("cannot open '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DatasetFormatError(path.string() + ": malformed dataset: " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kDatasetTag) {
            throw DatasetFormatError(path.string() + ": not a dataset file");
        }
        const int version = j.at("version").get<int>();
        if (version != kDatasetFormatVersion) {
            throw DatasetFormatError(path.string() + ": unsupported dataset version " +
                                     std::to_string(version) + " (expected " +
                                     std::to_string(kDatasetFormatVersion) + ")");
        }
        Dataset ds;
        ds.class_names = j.at("class_names").get<std::vector<std::string>>();
        ds.split_seed = j.at("split_seed").get<std::uint64_t>();
        ds.test_fraction = j.at("test_fraction").get<double>();
        ds.augmentation = j.at("augmentation").get<AugmentationSpec>();
        ds.device_conductivity = j.at("device").at("conductivity").get<double>();
        ds.device_effusivity = j.at("device").at("effusivity").get<double>();
        ds.configs = j.at("configs").get<std::vector<ContactConfig>>();
        ds.train = j.at("train").get<std::vector<TemperatureTrace>>();
        ds.test = j.at("test").get<std::vector<TemperatureTrace>>();
        check_loaded(ds);
        return ds;
    } catch (const json::exception& e) {
        throw DatasetFormatError(path.string() + ": invalid dataset field: " + e.what());
    }
}

void write_trace_csv(const TemperatureTrace& trace, std::ostream& out) {
    const auto& m = trace.meta;
    std::ostringstream header;
    header << std::setprecision(15);
    header << "# label = " << trace.label << '\n'
           << "# material_initial_c = " << m.material_initial << '\n'
           << "# device_initial_c = " << m.device_initial << '\n'
           << "# sensor_depth_m = " << m.sensor_depth << '\n'
           << "# duration_s = " << m.duration << '\n'
           << "# sample_rate_hz = " << m.sample_rate << '\n'
           << "# area_m2 = " << m.area << '\n';
    out << header.str() << "time_s,temperature_c\n";
    std::ostringstream rows;
    rows << std::setprecision(10);
    for (std::size_t k = 0; k < trace.samples.size(); ++k) {
        rows << static_cast<double>(k) * trace.dt << ',' << trace.samples[k] << '\n';
    }
    out << rows.str();
}

}  // namespace thermosense
