// Command-line harness: simulate contacts, build datasets, train and evaluate
// the LSTM classifier, and run whole experiments from spec files.
//
// Exit codes: 0 success, 1 invalid input, 2 runtime or numerical failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "thermosense/contact.hpp"
#include "thermosense/episodes.hpp"
#include "thermosense/experiment.hpp"
#include "thermosense/lstm.hpp"
#include "thermosense/materials.hpp"
#include "thermosense/metrics.hpp"

namespace ts = thermosense;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

// Only environment variable the tool reads: default directory for experiment outputs.
constexpr const char* kOutputDirEnv = "THERMOSENSE_OUTPUT_DIR";

struct Common {
    std::string db_path;

    const ts::MaterialDb& db() {
        if (db_path.empty()) return ts::bundled_db();
        if (!loaded) loaded = ts::load_db(db_path);
        return *loaded;
    }

   private:
    std::optional<ts::MaterialDb> loaded;
};

// Writes to `path`, or stdout when it is empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write(out);
    if (!out) throw std::runtime_error("error while writing " + path);
}

std::string output_dir_for(const std::string& flag, const ts::ExperimentSpec& spec) {
    if (!flag.empty()) return flag;
    if (!spec.output_dir.empty()) return spec.output_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
        return (std::filesystem::path(env) / spec.name).string();
    }
    return (std::filesystem::path("runs") / spec.name).string();
}

std::string percent(double fraction) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << 100.0 * fraction;
    return s.str();
}

// -- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string material;
    double material_temp = 43.0;
    double device_temp = 23.0;
    double duration = ts::kDefaultDuration;
    double rate = ts::kDefaultSampleRate;
    double depth = ts::kDefaultSensorDepth;
    std::string output;
};

int run_simulate(const SimulateArgs& a, Common& common) {
    ts::ContactConfig cfg;
    cfg.material = a.material;
    cfg.material_initial = a.material_temp;
    cfg.device_initial = a.device_temp;
    cfg.duration = a.duration;
    cfg.sample_rate = a.rate;
    cfg.sensor_depth = a.depth;
    cfg.validate();

    const auto& db = common.db();
    const ts::ThermalProps device = ts::water_device();
    const ts::TemperatureTrace trace = ts::synthesize_episode(cfg, db, device);
    const ts::ContactState state =
        ts::ContactState::resolve(device, ts::to_thermal_props(db.at(a.material)),
                                  a.device_temp, a.material_temp);

    std::ostringstream facts;
    facts << std::setprecision(10) << "surface_temp_c = " << state.surface_temp << '\n'
          << "gamma = " << state.gamma << '\n';
    emit(a.output, [&](std::ostream& out) {
        std::istringstream lines(facts.str());
        for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
        ts::write_trace_csv(trace, out);
    });
    if (!a.output.empty() && a.output != "-") std::cout << facts.str();
    return kExitOk;
}

// -- gen-dataset ------------------------------------------------------------

int run_gen_dataset(const std::string& spec_path, const std::string& output, Common& common) {
    const ts::ExperimentSpec spec = ts::load_spec(spec_path);
    spec.validate(common.db());
    const ts::Dataset ds = ts::build_dataset(spec.contact_configs(), common.db(), spec.device(),
                                             spec.augmentation, spec.test_fraction,
                                             spec.split_seed);
    ts::save_dataset(ds, output);
    std::cout << "classes = " << ds.class_names.size() << "\ntrain = " << ds.train.size()
              << "\ntest = " << ds.test.size() << '\n';
    return kExitOk;
}

// -- train ------------------------------------------------------------------

int run_train(const std::string& dataset, const ts::TrainConfig& cfg, const std::string& output,
              const std::string& loss_csv) {
    cfg.validate();
    const ts::Dataset ds = ts::load_dataset(dataset);
    const ts::TrainResult r = ts::train(ds, cfg);
    ts::save_model(r.model, output);
    if (!loss_csv.empty()) {
        emit(loss_csv, [&](std::ostream& out) {
            out << std::setprecision(12) << "epoch,loss\n0," << r.initial_loss << '\n';
            for (std::size_t e = 0; e < r.loss_history.size(); ++e) {
                out << e + 1 << ',' << r.loss_history[e] << '\n';
            }
        });
    }
    std::cout << std::setprecision(8) << "initial_loss = " << r.initial_loss
              << "\nfinal_loss = "
              << (r.loss_history.empty() ? r.initial_loss : r.loss_history.back()) << '\n';
    return kExitOk;
}

// -- eval -------------------------------------------------------------------

int run_eval(const std::string& model_path, const std::string& dataset, const std::string& output,
             bool on_train) {
    const ts::LstmModel model = ts::load_model(model_path);
    const ts::Dataset ds = ts::load_dataset(dataset);
    if (model.class_names() != ds.class_names) {
        throw std::invalid_argument("model and dataset disagree on the class list");
    }
    const ts::ConfusionMatrix cm = ts::evaluate(model, on_train ? ds.train : ds.test);
    emit(output, [&](std::ostream& out) { cm.write_csv(out); });
    (output.empty() || output == "-" ? std::cerr : std::cout)
        << "accuracy_pct = " << percent(cm.accuracy()) << '\n';
    return kExitOk;
}

// -- experiment -------------------------------------------------------------

int run_experiment_cmd(const std::string& spec_path, const std::string& out_flag, Common& common) {
    const ts::ExperimentSpec spec = ts::load_spec(spec_path);
    const ts::ExperimentResult r = ts::run_experiment(spec, common.db());
    const std::string dir = output_dir_for(out_flag, spec);
    ts::write_experiment_outputs(r, dir);
    std::cout << "experiment = " << spec.name << "\ndelta_t_c = " << spec.delta_t()
              << "\naccuracy_pct = " << percent(r.lstm.accuracy())
              << "\ncentroid_accuracy_pct = " << percent(r.centroid.accuracy())
              << "\noutput_dir = " << dir << '\n';
    return kExitOk;
}

// -- sweep-dt ---------------------------------------------------------------

int run_sweep(const std::string& spec_path, const std::vector<double>& deltas,
              const std::string& prefix, unsigned threads, const std::string& output,
              Common& common) {
    const ts::ExperimentSpec base = ts::load_spec(spec_path);
    const auto rows = ts::sweep_delta_t(base, deltas, common.db(), prefix, threads);
    emit(output, [&](std::ostream& out) { ts::write_sweep_csv(rows, out); });
    return kExitOk;
}

// -- flux-surface -----------------------------------------------------------

struct FluxArgs {
    std::vector<std::string> materials{"Copper", "Iron", "Wood"};
    std::vector<double> deltas{0, 5, 10, 15, 20};
    std::vector<double> areas{1e-4, 2e-4, 4e-4, 8e-4};
    double time = 10.0;
    double material_temp = 23.0;
    std::string output;
};

int run_flux(const FluxArgs& a, Common& common) {
    const auto rows = ts::flux_surface(a.materials, a.deltas, a.areas, a.time, a.material_temp,
                                       ts::water_device(), common.db());
    emit(a.output, [&](std::ostream& out) { ts::write_flux_csv(rows, out); });
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermosense: material classification from contact temperature traces"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--db", common.db_path, "Material database file (default: bundled table)");

    int status = kExitOk;

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Write one clean device-sensor trace as CSV");
    simulate->add_option("-m,--material", sim.material, "Material name")->required();
    simulate->add_option("--material-temp", sim.material_temp, "Material initial temperature, C")
        ->capture_default_str();
    simulate->add_option("--device-temp", sim.device_temp, "Device initial temperature, C")
        ->capture_default_str();
    simulate->add_option("--duration", sim.duration, "Contact duration, s")->capture_default_str();
    simulate->add_option("--rate", sim.rate, "Sample rate, Hz")->capture_default_str();
    simulate->add_option("--depth", sim.depth, "Sensor depth below the contact, m")
        ->capture_default_str();
    simulate->add_option("-o,--output", sim.output, "Output CSV (default: stdout)");
    simulate->callback([&] { status = run_simulate(sim, common); });

    std::string gen_spec, gen_out;
    auto* gen = app.add_subcommand("gen-dataset", "Build an augmented dataset from a spec file");
    gen->add_option("spec", gen_spec, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
    gen->add_option("-o,--output", gen_out, "Dataset file (JSON)")->required();
    gen->callback([&] { status = run_gen_dataset(gen_spec, gen_out, common); });

    std::string train_ds, train_out, train_loss;
    ts::TrainConfig train_cfg;
    auto* train = app.add_subcommand("train", "Train the LSTM on a dataset file");
    train->add_option("dataset", train_ds, "Dataset file")->required()->check(CLI::ExistingFile);
    train->add_option("-o,--output", train_out, "Model checkpoint")->required();
    train->add_option("--hidden", train_cfg.hidden_size, "Hidden units")->capture_default_str();
    train->add_option("--batch", train_cfg.batch_size, "Batch size")->capture_default_str();
    train->add_option("--epochs", train_cfg.epochs, "Epochs")->capture_default_str();
    train->add_option("--lr", train_cfg.learning_rate, "Learning rate")->capture_default_str();
    train->add_option("--clip", train_cfg.clip_norm, "Gradient-norm clip (<= 0 disables)")
        ->capture_default_str();
    train->add_option("--seed", train_cfg.seed, "Initialization and shuffling seed")
        ->capture_default_str();
    train->add_option("--loss-csv", train_loss, "Write the per-epoch loss curve here");
    train->callback([&] { status = run_train(train_ds, train_cfg, train_out, train_loss); });

    std::string eval_model, eval_ds, eval_out;
    bool eval_train = false;
    auto* eval = app.add_subcommand("eval", "Confusion matrix of a model on a dataset's test split");
    eval->add_option("model", eval_model, "Model checkpoint")->required()->check(CLI::ExistingFile);
    eval->add_option("dataset", eval_ds, "Dataset file")->required()->check(CLI::ExistingFile);
    eval->add_option("-o,--output", eval_out, "Confusion CSV (default: stdout)");
    eval->add_flag("--train-split", eval_train, "Evaluate on the training split instead");
    eval->callback([&] { status = run_eval(eval_model, eval_ds, eval_out, eval_train); });

    std::string sweep_spec, sweep_out, sweep_prefix = "2-";
    std::vector<double> sweep_deltas{0, 5, 10, 15, 20};
    unsigned sweep_threads = 1;
    auto* sweep = app.add_subcommand("sweep-dt", "Accuracy versus |delta T| for a base spec");
    sweep->add_option("spec", sweep_spec, "Base experiment spec")->required()->check(CLI::ExistingFile);
    sweep->add_option("--delta", sweep_deltas, "Temperature differences, C")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--prefix", sweep_prefix, "Case label prefix")->capture_default_str();
    sweep->add_option("-j,--threads", sweep_threads, "Concurrent configurations")
        ->capture_default_str();
    sweep->add_option("-o,--output", sweep_out, "Accuracy CSV (default: stdout)");
    sweep->callback([&] {
        status = run_sweep(sweep_spec, sweep_deltas, sweep_prefix, sweep_threads, sweep_out, common);
    });

    std::string exp_spec, exp_out;
    auto* experiment = app.add_subcommand("experiment", "Run one spec file end to end");
    experiment->add_option("spec", exp_spec, "Experiment spec")->required()->check(CLI::ExistingFile);
    experiment->add_option("-o,--output-dir", exp_out,
                           std::string("Output directory (default: spec output_dir, then $") +
                               kOutputDirEnv + "/<name>, then runs/<name>)");
    experiment->callback([&] { status = run_experiment_cmd(exp_spec, exp_out, common); });

    FluxArgs flux;
    auto* flux_cmd = app.add_subcommand("flux-surface", "Heat flow over a delta T x area grid");
    flux_cmd->add_option("--materials", flux.materials, "Materials")->delimiter(',')
        ->capture_default_str();
    flux_cmd->add_option("--delta", flux.deltas, "Device minus material temperature, C")
        ->delimiter(',')
        ->capture_default_str();
    flux_cmd->add_option("--area", flux.areas, "Contact areas, m^2")->delimiter(',')
        ->capture_default_str();
    flux_cmd->add_option("-t,--time", flux.time, "Time since contact, s")->capture_default_str();
    flux_cmd->add_option("--material-temp", flux.material_temp, "Material temperature, C")
        ->capture_default_str();
    flux_cmd->add_option("-o,--output", flux.output, "CSV (default: stdout)");
    flux_cmd->callback([&] { status = run_flux(flux, common); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    } catch (const ts::MaterialDbError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::logic_error& e) {
        // SpecError, DomainError, UnknownMaterial and other argument checks.
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return status;
}
