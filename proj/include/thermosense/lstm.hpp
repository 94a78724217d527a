#pragma once

/**
 * @file lstm.hpp
 * @brief Single-layer LSTM sequence classifier trained with BPTT.
 *
 * The network reads one (normalized) temperature per time step and classifies
 * from the last hidden state:
 *
 *     z_t = W_in x_t + W_rec h_{t-1} + b          (gates i, f, g, o stacked)
 *     c_t = sigmoid(f) * c_{t-1} + sigmoid(i) * tanh(g)
 *     h_t = sigmoid(o) * tanh(c_t)
 *     p   = softmax(W_out h_T + b_out)
 *
 * All parameters live in one flat vector so optimizer steps, clipping and
 * finite-difference checks treat them uniformly. Block order inside the
 * vector: W_in (4H), W_rec (4H x H, column-major), b (4H), W_out (C x H,
 * column-major), b_out (C).
 */

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermosense/episodes.hpp"
#include "thermosense/metrics.hpp"

namespace thermosense {

class NumericalError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct LstmShape {
    std::size_t hidden = 32;
    std::size_t classes = 2;

    std::size_t gates() const noexcept { return 4 * hidden; }
    std::size_t input_weights_offset() const noexcept { return 0; }
    std::size_t recurrent_weights_offset() const noexcept { return gates(); }
    std::size_t bias_offset() const noexcept { return gates() + gates() * hidden; }
    std::size_t output_weights_offset() const noexcept { return bias_offset() + gates(); }
    std::size_t output_bias_offset() const noexcept {
        return output_weights_offset() + classes * hidden;
    }
    std::size_t parameter_count() const noexcept { return output_bias_offset() + classes; }

    friend bool operator==(const LstmShape&, const LstmShape&) = default;
};

/// z-score applied to raw temperatures before they enter the network.
struct Normalization {
    double mean = 0.0;
    double scale = 1.0;

    double apply(double celsius) const noexcept { return (celsius - mean) / scale; }
    friend bool operator==(const Normalization&, const Normalization&) = default;
};

class LstmModel {
   public:
    /// Uniform(-k, k) weights with k = 1/sqrt(hidden); forget-gate bias 1.
    static LstmModel initialize(std::size_t hidden, std::vector<std::string> class_names,
                                std::uint64_t seed);

    LstmModel(LstmShape shape, std::vector<std::string> class_names, Eigen::VectorXd parameters,
              Normalization normalization);

    const LstmShape& shape() const noexcept { return shape_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    const Normalization& normalization() const noexcept { return normalization_; }
    void set_normalization(Normalization n) noexcept { normalization_ = n; }

    const Eigen::VectorXd& parameters() const noexcept { return params_; }
    Eigen::VectorXd& parameters() noexcept { return params_; }

    Eigen::Map<const Eigen::VectorXd> input_weights() const;
    Eigen::Map<const Eigen::MatrixXd> recurrent_weights() const;
    Eigen::Map<const Eigen::VectorXd> bias() const;
    Eigen::Map<const Eigen::MatrixXd> output_weights() const;
    Eigen::Map<const Eigen::VectorXd> output_bias() const;

    friend bool operator==(const LstmModel& a, const LstmModel& b) {
        return a.shape_ == b.shape_ && a.class_names_ == b.class_names_ &&
               a.normalization_ == b.normalization_ && a.params_ == b.params_;
    }

   private:
    LstmShape shape_;
    std::vector<std::string> class_names_;
    Eigen::VectorXd params_;
    Normalization normalization_;
};

struct TrainConfig {
    std::size_t hidden_size = 32;
    std::size_t batch_size = 100;
    std::size_t epochs = 2000;
    double learning_rate = 0.05;
    double clip_norm = 5.0;  ///< global gradient-norm clip; <= 0 disables
    std::uint64_t seed = 1;

    void validate() const;
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainResult {
    LstmModel model;
    double initial_loss = 0.0;         ///< training-set loss before the first update
    std::vector<double> loss_history;  ///< mean training loss per epoch
};

/// Mean and standard deviation over every sample of `traces`.
Normalization fit_normalization(std::span<const TemperatureTrace> traces);

/// Steps x traces matrix of normalized inputs.
Eigen::MatrixXd normalized_inputs(const LstmModel& model, std::span<const TemperatureTrace> traces);

/// Class probabilities (classes x batch) for already-normalized inputs.
Eigen::MatrixXd predict_proba(const LstmModel& model, const Eigen::MatrixXd& inputs);

/// Class probabilities for one raw temperature trace.
std::vector<double> forward(const LstmModel& model, std::span<const double> samples);

/// Mean cross-entropy over the batch times `loss_scale`. When `gradient` is
/// non-null it receives d(loss)/d(parameters) computed by BPTT.
double loss_and_gradient(const LstmModel& model, const Eigen::MatrixXd& inputs,
                         std::span<const int> labels, Eigen::VectorXd* gradient,
                         double loss_scale = 1.0);

/// Max over parameters of |analytic - central difference| / (|analytic| + |fd| + eps).
double gradient_check(const LstmModel& model, const Eigen::MatrixXd& inputs,
                      std::span<const int> labels, double step = 1e-5);

/// Mini-batch SGD with global-norm clipping on the training split. Throws
/// NumericalError if the loss becomes non-finite.
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

/// Throws std::invalid_argument when a trace label is not a model class.
ConfusionMatrix evaluate(const LstmModel& model, std::span<const TemperatureTrace> traces);
/// Also checks that model and dataset agree on the class list.
ConfusionMatrix evaluate(const LstmModel& model, const Dataset& ds);

class CheckpointError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_model(const LstmModel& model, const std::filesystem::path& path);
LstmModel load_model(const std::filesystem::path& path);

}  // namespace thermosense
