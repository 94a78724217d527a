#include "thermosense/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "serialization.hpp"

namespace thermosense {

namespace {

using nlohmann::json;

const std::set<std::string>& known_spec_keys() {
    static const std::set<std::string> keys = {
        "name",        "notes",        "materials",    "material_temp", "device_temp",
        "delta_t",     "duration",     "sample_rate",  "sensor_depth",  "area",
        "device",      "augmentation", "test_fraction", "split_seed",   "train",
        "output_dir"};
    return keys;
}

const std::set<std::string>& known_train_keys() {
    static const std::set<std::string> keys = {"hidden_size", "batch_size", "epochs",
                                               "learning_rate", "clip_norm", "seed"};
    return keys;
}

template <typename T>
T field(const json& j, const char* key, T fallback, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    try {
        return it->template get<T>();
    } catch (const json::exception& e) {
        throw SpecError(path + key, std::string("wrong type: ") + e.what());
    }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& path) {
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw SpecError(path + key, "unknown field");
    }
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw SpecError(name, "must be a finite value > 0");
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::string shortest(double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
}

}  // namespace

SpecError::SpecError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

ThermalProps ExperimentSpec::device() const {
    return ThermalProps::from_conductivity_effusivity(device_conductivity, device_effusivity);
}

std::vector<ContactConfig> ExperimentSpec::contact_configs() const {
    std::vector<ContactConfig> out;
    out.reserve(materials.size());
    for (const auto& m : materials) {
        ContactConfig c;
        c.material = m;
        c.material_initial = material_temp;
        c.device_initial = device_temp;
        c.sensor_depth = sensor_depth;
        c.duration = duration;
        c.sample_rate = sample_rate;
        c.area = area;
        out.push_back(c);
    }
    return out;
}

void ExperimentSpec::validate(const MaterialDb& db) const {
    if (name.empty()) throw SpecError("name", "must not be empty");
    if (materials.size() < 2) throw SpecError("materials", "need at least two classes");
    std::vector<std::string> seen;
    for (const auto& m : materials) {
        if (!db.find(m)) throw SpecError("materials", "unknown material '" + m + "'");
        for (const auto& s : seen) {
            if (iequals(s, m)) throw SpecError("materials", "duplicate material '" + m + "'");
        }
        seen.push_back(m);
    }
    if (!std::isfinite(material_temp) || material_temp <= kAbsoluteZeroC) {
        throw SpecError("material_temp", "must be a finite temperature above absolute zero");
    }
    if (!std::isfinite(device_temp) || device_temp <= kAbsoluteZeroC) {
        throw SpecError("device_temp", "must be a finite temperature above absolute zero");
    }
    require_positive(duration, "duration");
    require_positive(sample_rate, "sample_rate");
    require_positive(sensor_depth, "sensor_depth");
    require_positive(area, "area");
    require_positive(device_conductivity, "device.conductivity");
    require_positive(device_effusivity, "device.effusivity");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw SpecError("test_fraction", "must lie in (0, 1)");
    }
    try {
        augmentation.validate();
    } catch (const std::exception& e) {
        throw SpecError("augmentation", e.what());
    }
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(augmentation.multiplier)));
    if (n_test == 0 || n_test >= augmentation.multiplier) {
        throw SpecError("test_fraction", "leaves an empty train or test split");
    }
    try {
        train.validate();
    } catch (const std::exception& e) {
        throw SpecError("train", e.what());
    }
    for (const auto& c : contact_configs()) {
        try {
            c.validate();
        } catch (const std::exception& e) {
            throw SpecError("contact", e.what());
        }
    }
}

ExperimentSpec parse_spec(const json& j) {
    if (!j.is_object()) throw SpecError("<root>", "spec must be a JSON object");
    reject_unknown(j, known_spec_keys(), "");

    ExperimentSpec s;
    s.name = field<std::string>(j, "name", s.name, "");
    s.notes = field<std::string>(j, "notes", s.notes, "");
    s.materials = field<std::vector<std::string>>(j, "materials", {}, "");
    s.material_temp = field<double>(j, "material_temp", s.material_temp, "");
    if (j.contains("delta_t") && j.contains("device_temp")) {
        throw SpecError("delta_t", "give either delta_t or device_temp, not both");
    }
    if (j.contains("delta_t")) {
        s.device_temp = s.material_temp + field<double>(j, "delta_t", 0.0, "");
    } else {
        s.device_temp = field<double>(j, "device_temp", s.device_temp, "");
    }
    s.duration = field<double>(j, "duration", s.duration, "");
    s.sample_rate = field<double>(j, "sample_rate", s.sample_rate, "");
    s.sensor_depth = field<double>(j, "sensor_depth", s.sensor_depth, "");
    s.area = field<double>(j, "area", s.area, "");
    s.test_fraction = field<double>(j, "test_fraction", s.test_fraction, "");
    s.split_seed = field<std::uint64_t>(j, "split_seed", s.split_seed, "");
    s.output_dir = field<std::string>(j, "output_dir", s.output_dir, "");

    if (const auto it = j.find("device"); it != j.end()) {
        if (!it->is_object()) throw SpecError("device", "must be an object");
        reject_unknown(*it, {"conductivity", "effusivity"}, "device.");
        s.device_conductivity = field<double>(*it, "conductivity", s.device_conductivity, "device.");
        s.device_effusivity = field<double>(*it, "effusivity", s.device_effusivity, "device.");
    }
    if (const auto it = j.find("augmentation"); it != j.end()) {
        if (!it->is_object()) throw SpecError("augmentation", "must be an object");
        reject_unknown(*it, {"noise_sigma", "shift_range", "multiplier", "rng_seed"},
                       "augmentation.");
        try {
            from_json(*it, s.augmentation);
        } catch (const json::exception& e) {
            throw SpecError("augmentation", std::string("wrong type: ") + e.what());
        }
    }
    if (const auto it = j.find("train"); it != j.end()) {
        if (!it->is_object()) throw SpecError("train", "must be an object");
        reject_unknown(*it, known_train_keys(), "train.");
        auto& t = s.train;
        t.hidden_size = field<std::size_t>(*it, "hidden_size", t.hidden_size, "train.");
        t.batch_size = field<std::size_t>(*it, "batch_size", t.batch_size, "train.");
        t.epochs = field<std::size_t>(*it, "epochs", t.epochs, "train.");
        t.learning_rate = field<double>(*it, "learning_rate", t.learning_rate, "train.");
        t.clip_norm = field<double>(*it, "clip_norm", t.clip_norm, "train.");
        t.seed = field<std::uint64_t>(*it, "seed", t.seed, "train.");
    }
    return s;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SpecError("<root>", std::string("invalid JSON in ") + path.string() + ": " + e.what());
    }
    return parse_spec(j);
}

json resolved_spec_json(const ExperimentSpec& s) {
    json j;
    j["name"] = s.name;
    if (!s.notes.empty()) j["notes"] = s.notes;
    j["materials"] = s.materials;
    j["material_temp"] = s.material_temp;
    j["device_temp"] = s.device_temp;
    j["duration"] = s.duration;
    j["sample_rate"] = s.sample_rate;
    j["sensor_depth"] = s.sensor_depth;
    j["area"] = s.area;
    const ThermalProps dev = s.device();
    j["device"] = {{"conductivity", dev.conductivity()}, {"effusivity", dev.effusivity()}};
    j["augmentation"] = s.augmentation;
    j["test_fraction"] = s.test_fraction;
    j["split_seed"] = s.split_seed;
    j["train"] = {{"hidden_size", s.train.hidden_size}, {"batch_size", s.train.batch_size},
                  {"epochs", s.train.epochs},           {"learning_rate", s.train.learning_rate},
                  {"clip_norm", s.train.clip_norm},     {"seed", s.train.seed}};
    if (!s.output_dir.empty()) j["output_dir"] = s.output_dir;
    return j;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const MaterialDb& db) {
    spec.validate(db);
    const auto start = std::chrono::steady_clock::now();

    const Dataset ds = build_dataset(spec.contact_configs(), db, spec.device(), spec.augmentation,
                                     spec.test_fraction, spec.split_seed);
    TrainResult trained = train(ds, spec.train);
    ConfusionMatrix lstm = evaluate(trained.model, ds);
    ConfusionMatrix centroid = nearest_centroid_classify(ds.train, ds.test, ds.class_names);

    const auto stop = std::chrono::steady_clock::now();
    ExperimentResult r{spec,
                       ds.train.size(),
                       ds.test.size(),
                       std::move(trained),
                       std::move(lstm),
                       std::move(centroid),
                       std::chrono::duration<double>(stop - start).count()};
    return r;
}

json summary_json(const ExperimentResult& r) {
    const auto confusion = [](const ConfusionMatrix& m) {
        json rows = json::array();
        for (std::size_t t = 0; t < m.num_classes(); ++t) {
            json row = json::array();
            for (std::size_t p = 0; p < m.num_classes(); ++p) row.push_back(m.count(t, p));
            rows.push_back(row);
        }
        return rows;
    };
    json j;
    j["spec"] = resolved_spec_json(r.spec);
    j["delta_t"] = r.spec.delta_t();
    j["classes"] = r.lstm.class_names();
    j["train_size"] = r.train_size;
    j["test_size"] = r.test_size;
    j["accuracy"] = r.lstm.accuracy();
    j["confusion"] = confusion(r.lstm);
    j["centroid_accuracy"] = r.centroid.accuracy();
    j["centroid_confusion"] = confusion(r.centroid);
    j["initial_loss"] = r.training.initial_loss;
    j["final_loss"] =
        r.training.loss_history.empty() ? r.training.initial_loss : r.training.loss_history.back();
    j["normalization"] = {{"mean", r.training.model.normalization().mean},
                          {"scale", r.training.model.normalization().scale}};
    j["seconds"] = r.seconds;
    return j;
}

void write_experiment_outputs(const ExperimentResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto open = [&](const char* name) {
        std::ofstream out(dir / name);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("confusion.csv");
        r.lstm.write_csv(out);
    }
    {
        auto out = open("centroid_confusion.csv");
        r.centroid.write_csv(out);
    }
    {
        auto out = open("loss.csv");
        out << "epoch,loss\n" << "0," << shortest(r.training.initial_loss) << '\n';
        for (std::size_t e = 0; e < r.training.loss_history.size(); ++e) {
            out << e + 1 << ',' << shortest(r.training.loss_history[e]) << '\n';
        }
    }
    {
        auto out = open("summary.json");
        out << summary_json(r).dump(2) << '\n';
    }
    save_model(r.training.model, dir / "model.bin");
}

std::vector<SweepRow> sweep_delta_t(const ExperimentSpec& base, const std::vector<double>& deltas,
                                    const MaterialDb& db, const std::string& case_prefix,
                                    unsigned threads) {
    if (deltas.empty()) throw SpecError("delta_t", "sweep needs at least one value");
    if (deltas.size() > 26) throw SpecError("delta_t", "sweep supports at most 26 values");
    const double direction = base.device_temp > base.material_temp ? 1.0 : -1.0;

    std::vector<ExperimentSpec> specs;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (!(deltas[k] >= 0.0) || !std::isfinite(deltas[k])) {
            throw SpecError("delta_t", "sweep values must be finite and >= 0");
        }
        ExperimentSpec s = base;
        s.device_temp = base.material_temp + direction * deltas[k];
        s.name = case_prefix + static_cast<char>('A' + k);
        s.validate(db);
        specs.push_back(std::move(s));
    }

    std::vector<SweepRow> rows(specs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t k = next++; k < specs.size(); k = next++) {
            try {
                const ExperimentResult r = run_experiment(specs[k], db);
                rows[k] = {specs[k].name, deltas[k], r.lstm.accuracy(), r.centroid.accuracy()};
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned n_workers =
        std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(specs.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "case,delta_t_c,accuracy_pct,centroid_accuracy_pct\n";
    for (const auto& r : rows) {
        out << r.case_label << ',' << shortest(r.delta_t) << ',' << fixed(100.0 * r.accuracy, 2)
            << ',' << fixed(100.0 * r.centroid_accuracy, 2) << '\n';
    }
}

std::vector<FluxRow> flux_surface(const std::vector<std::string>& materials,
                                  const std::vector<double>& deltas,
                                  const std::vector<double>& areas, double t,
                                  double material_temp, const ThermalProps& device,
                                  const MaterialDb& db) {
    if (!(t > 0.0)) throw DomainError("flux surface time must be > 0");
    std::vector<FluxRow> rows;
    for (const auto& name : materials) {
        const MaterialRecord* rec = db.find(name);
        if (!rec) throw UnknownMaterial("unknown material '" + name + "'");
        const ThermalProps mat = to_thermal_props(*rec);
        const double g = gamma(device, mat);
        for (double dT : deltas) {
            const double device_temp = material_temp + dT;
            const double ts = contact_surface_temp(material_temp, device_temp, g);
            for (double a : areas) {
                if (!(a > 0.0)) throw DomainError("contact area must be > 0");
                const double q = heat_flux_device(device, dT, g, a, t);
                rows.push_back({rec->name, dT, a, q, ts});
            }
        }
    }
    return rows;
}

void write_flux_csv(const std::vector<FluxRow>& rows, std::ostream& out) {
    out << "material,delta_t_c,area_m2,q_device_w,surface_temp_c\n";
    for (const auto& r : rows) {
        out << r.material << ',' << shortest(r.delta_t) << ',' << shortest(r.area) << ','
            << shortest(r.q_device) << ',' << shortest(r.surface_temp) << '\n';
    }
}

}  // namespace thermosense
