#include "thermosense/lstm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include "thermosense/random.hpp"

namespace thermosense {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// --- model ------------------------------------------------------------------

LstmModel LstmModel::initialize(std::size_t hidden, std::vector<std::string> class_names,
                                std::uint64_t seed) {
    if (hidden == 0) throw std::invalid_argument("hidden size must be >= 1");
    if (class_names.empty()) throw std::invalid_argument("model needs at least one class");
    const LstmShape shape{hidden, class_names.size()};
    VectorXd params(shape.parameter_count());
    auto eng = make_stream(seed, 0);
    const double k = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (Eigen::Index i = 0; i < params.size(); ++i) params[i] = uniform(eng, -k, k);
    params.segment(shape.bias_offset() + hidden, hidden).setOnes();
    return LstmModel(shape, std::move(class_names), std::move(params), Normalization{});
}

LstmModel::LstmModel(LstmShape shape, std::vector<std::string> class_names, VectorXd parameters,
                     Normalization normalization)
    : shape_(shape),
      class_names_(std::move(class_names)),
      params_(std::move(parameters)),
      normalization_(normalization) {
    if (shape_.hidden == 0 || shape_.classes == 0) throw std::invalid_argument("empty LSTM shape");
    if (class_names_.size() != shape_.classes) {
        throw std::invalid_argument("class name count does not match LSTM shape");
    }
    if (static_cast<std::size_t>(params_.size()) != shape_.parameter_count()) {
        throw std::invalid_argument("parameter vector does not match LSTM shape");
    }
    if (!params_.allFinite()) throw NumericalError("non-finite LSTM parameter");
    if (!std::isfinite(normalization_.mean) || !(normalization_.scale > 0.0)) {
        throw std::invalid_argument("invalid normalization");
    }
}

Eigen::Map<const VectorXd> LstmModel::input_weights() const {
    return {params_.data() + shape_.input_weights_offset(),
            static_cast<Eigen::Index>(shape_.gates())};
}
Eigen::Map<const MatrixXd> LstmModel::recurrent_weights() const {
    return {params_.data() + shape_.recurrent_weights_offset(),
            static_cast<Eigen::Index>(shape_.gates()), static_cast<Eigen::Index>(shape_.hidden)};
}
Eigen::Map<const VectorXd> LstmModel::bias() const {
    return {params_.data() + shape_.bias_offset(), static_cast<Eigen::Index>(shape_.gates())};
}
Eigen::Map<const MatrixXd> LstmModel::output_weights() const {
    return {params_.data() + shape_.output_weights_offset(),
            static_cast<Eigen::Index>(shape_.classes), static_cast<Eigen::Index>(shape_.hidden)};
}
Eigen::Map<const VectorXd> LstmModel::output_bias() const {
    return {params_.data() + shape_.output_bias_offset(),
            static_cast<Eigen::Index>(shape_.classes)};
}

void TrainConfig::validate() const {
    if (hidden_size < 1) throw std::invalid_argument("hidden_size: must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size: must be >= 1");
    if (epochs < 1) throw std::invalid_argument("epochs: must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning_rate: must be > 0");
    }
    if (!std::isfinite(clip_norm)) throw std::invalid_argument("clip_norm: must be finite");
}

// --- forward / backward -----------------------------------------------------

namespace {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
    return (1.0 + (-z).exp()).inverse();
}

// tanh through the vectorized exp; Eigen evaluates double tanh one scalar at
// a time, which dominated training time.
template <typename Derived>
auto tanh_vec(const Eigen::ArrayBase<Derived>& z) {
    return 1.0 - 2.0 * (1.0 + (2.0 * z).exp()).inverse();
}

/// Activations of one batch kept for the backward pass.
class Workspace {
   public:
    void run_forward(const LstmModel& model, const MatrixXd& inputs) {
        const auto& shape = model.shape();
        const auto h = static_cast<Eigen::Index>(shape.hidden);
        const auto steps = inputs.rows();
        const auto batch = inputs.cols();
        if (steps == 0) throw std::invalid_argument("LSTM input has zero time steps");

        gates_.resize(static_cast<std::size_t>(steps));
        cells_.resize(static_cast<std::size_t>(steps));
        tanh_cells_.resize(static_cast<std::size_t>(steps));
        hiddens_.resize(static_cast<std::size_t>(steps));

        const auto w_in = model.input_weights();
        const auto w_rec = model.recurrent_weights();
        const auto b = model.bias();

        auto& z = z_;
        z.resize(4 * h, batch);
        for (Eigen::Index t = 0; t < steps; ++t) {
            const auto ts = static_cast<std::size_t>(t);
            if (t == 0) {
                z.noalias() = w_in * inputs.row(0);
            } else {
                z.noalias() = w_rec * hiddens_[ts - 1];
                z.noalias() += w_in * inputs.row(t);
            }
            z.colwise() += b;

            auto& gate = gates_[ts];
            gate.resize(4 * h, batch);
            gate.topRows(h) = sigmoid(z.topRows(h).array()).matrix();
            gate.middleRows(h, h) = sigmoid(z.middleRows(h, h).array()).matrix();
            gate.middleRows(2 * h, h) = tanh_vec(z.middleRows(2 * h, h).array()).matrix();
            gate.bottomRows(h) = sigmoid(z.bottomRows(h).array()).matrix();

            auto& cell = cells_[ts];
            if (t == 0) {
                cell = (gate.topRows(h).array() * gate.middleRows(2 * h, h).array()).matrix();
            } else {
                cell = (gate.middleRows(h, h).array() * cells_[ts - 1].array() +
                        gate.topRows(h).array() * gate.middleRows(2 * h, h).array())
                           .matrix();
            }
            tanh_cells_[ts] = tanh_vec(cell.array()).matrix();
            hiddens_[ts] = (gate.bottomRows(h).array() * tanh_cells_[ts].array()).matrix();
        }

        logits_.noalias() = model.output_weights() * hiddens_.back();
        logits_.colwise() += model.output_bias();
        probs_.resize(logits_.rows(), logits_.cols());
        for (Eigen::Index j = 0; j < logits_.cols(); ++j) {
            const double top = logits_.col(j).maxCoeff();
            probs_.col(j) = (logits_.col(j).array() - top).exp().matrix();
            probs_.col(j) /= probs_.col(j).sum();
        }
    }

    const MatrixXd& probabilities() const noexcept { return probs_; }

    double loss(std::span<const int> labels) const {
        double sum = 0.0;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            sum -= std::log(probs_(labels[j], static_cast<Eigen::Index>(j)));
        }
        return sum / static_cast<double>(labels.size());
    }

    /// Fills `grad` with d(scale * mean CE)/d(params). Requires run_forward.
    void run_backward(const LstmModel& model, const MatrixXd& inputs, std::span<const int> labels,
                      double scale, VectorXd& grad) {
        const auto& shape = model.shape();
        const auto h = static_cast<Eigen::Index>(shape.hidden);
        const auto c = static_cast<Eigen::Index>(shape.classes);
        const auto batch = inputs.cols();
        const auto steps = inputs.rows();

        grad.setZero(static_cast<Eigen::Index>(shape.parameter_count()));
        Eigen::Map<VectorXd> g_in(grad.data() + shape.input_weights_offset(), 4 * h);
        Eigen::Map<MatrixXd> g_rec(grad.data() + shape.recurrent_weights_offset(), 4 * h, h);
        Eigen::Map<VectorXd> g_b(grad.data() + shape.bias_offset(), 4 * h);
        Eigen::Map<MatrixXd> g_out(grad.data() + shape.output_weights_offset(), c, h);
        Eigen::Map<VectorXd> g_bout(grad.data() + shape.output_bias_offset(), c);

        auto& d_logits = d_logits_;
        d_logits = probs_;
        for (Eigen::Index j = 0; j < batch; ++j) d_logits(labels[static_cast<std::size_t>(j)], j) -= 1.0;
        d_logits *= scale / static_cast<double>(batch);

        g_out.noalias() = d_logits * hiddens_.back().transpose();
        g_bout = d_logits.rowwise().sum();

        const auto w_rec = model.recurrent_weights();
        auto& d_h = d_h_;
        auto& d_c = d_c_;
        auto& d_z = d_z_;
        d_h.noalias() = model.output_weights().transpose() * d_logits;
        d_c.setZero(h, batch);
        d_z.resize(4 * h, batch);

        for (Eigen::Index t = steps - 1; t >= 0; --t) {
            const auto ts = static_cast<std::size_t>(t);
            const auto& gate = gates_[ts];
            const auto i_g = gate.topRows(h).array();
            const auto f_g = gate.middleRows(h, h).array();
            const auto c_g = gate.middleRows(2 * h, h).array();
            const auto o_g = gate.bottomRows(h).array();
            const auto tc = tanh_cells_[ts].array();

            d_c.array() += d_h.array() * o_g * (1.0 - tc.square());

            d_z.topRows(h) = (d_c.array() * c_g * i_g * (1.0 - i_g)).matrix();
            if (t > 0) {
                d_z.middleRows(h, h) =
                    (d_c.array() * cells_[ts - 1].array() * f_g * (1.0 - f_g)).matrix();
            } else {
                d_z.middleRows(h, h).setZero();
            }
            d_z.middleRows(2 * h, h) = (d_c.array() * i_g * (1.0 - c_g.square())).matrix();
            d_z.bottomRows(h) = (d_h.array() * tc * o_g * (1.0 - o_g)).matrix();

            g_in.noalias() += d_z * inputs.row(t).transpose();
            g_b += d_z.rowwise().sum();
            if (t > 0) {
                g_rec.noalias() += d_z * hiddens_[ts - 1].transpose();
                d_h.noalias() = w_rec.transpose() * d_z;
                d_c.array() *= f_g;
            }
        }
    }

   private:
    std::vector<MatrixXd> gates_;  // activated i, f, g, o per step
    std::vector<MatrixXd> cells_;
    std::vector<MatrixXd> tanh_cells_;
    std::vector<MatrixXd> hiddens_;
    MatrixXd logits_;
    MatrixXd probs_;
    // Scratch reused across calls to avoid per-batch allocation.
    MatrixXd z_, d_logits_, d_h_, d_c_, d_z_;
};

void check_labels(const LstmModel& model, const MatrixXd& inputs, std::span<const int> labels) {
    if (static_cast<Eigen::Index>(labels.size()) != inputs.cols()) {
        throw std::invalid_argument("label count does not match batch size");
    }
    if (labels.empty()) throw std::invalid_argument("empty batch");
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= model.shape().classes) {
            throw std::invalid_argument("label out of range");
        }
    }
}

std::vector<int> labels_of(const std::vector<std::string>& names,
                           std::span<const TemperatureTrace> traces) {
    std::vector<int> labels;
    labels.reserve(traces.size());
    for (const auto& t : traces) {
        int idx = -1;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == t.label) idx = static_cast<int>(i);
        }
        if (idx < 0) {
            throw std::invalid_argument("trace label '" + t.label + "' is not a model class");
        }
        labels.push_back(idx);
    }
    return labels;
}

}  // namespace

Normalization fit_normalization(std::span<const TemperatureTrace> traces) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : traces) {
        for (double v : t.samples) sum += v;
        n += t.samples.size();
    }
    if (n == 0) throw std::invalid_argument("cannot normalize an empty trace set");
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (const auto& t : traces) {
        for (double v : t.samples) sq += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(sq / static_cast<double>(n));
    return Normalization{mean, sd > 1e-12 ? sd : 1.0};
}

MatrixXd normalized_inputs(const LstmModel& model, std::span<const TemperatureTrace> traces) {
    if (traces.empty()) return MatrixXd(0, 0);
    const auto steps = traces.front().samples.size();
    MatrixXd x(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(traces.size()));
    for (std::size_t j = 0; j < traces.size(); ++j) {
        if (traces[j].samples.size() != steps) {
            throw std::invalid_argument("traces in one batch must have equal length");
        }
        for (std::size_t t = 0; t < steps; ++t) {
            x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
                model.normalization().apply(traces[j].samples[t]);
        }
    }
    return x;
}

MatrixXd predict_proba(const LstmModel& model, const MatrixXd& inputs) {
    Workspace ws;
    ws.run_forward(model, inputs);
    return ws.probabilities();
}

std::vector<double> forward(const LstmModel& model, std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("forward: empty trace");
    MatrixXd x(static_cast<Eigen::Index>(samples.size()), 1);
    for (std::size_t t = 0; t < samples.size(); ++t) {
        x(static_cast<Eigen::Index>(t), 0) = model.normalization().apply(samples[t]);
    }
    const MatrixXd p = predict_proba(model, x);
    return std::vector<double>(p.data(), p.data() + p.size());
}

double loss_and_gradient(const LstmModel& model, const MatrixXd& inputs,
                         std::span<const int> labels, VectorXd* gradient, double loss_scale) {
    check_labels(model, inputs, labels);
    Workspace ws;
    ws.run_forward(model, inputs);
    const double loss = ws.loss(labels) * loss_scale;
    if (gradient) ws.run_backward(model, inputs, labels, loss_scale, *gradient);
    return loss;
}

double gradient_check(const LstmModel& model, const MatrixXd& inputs, std::span<const int> labels,
                      double step) {
    VectorXd analytic;
    loss_and_gradient(model, inputs, labels, &analytic);

    LstmModel probe = model;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        const double saved = probe.parameters()[i];
        probe.parameters()[i] = saved + step;
        const double up = loss_and_gradient(probe, inputs, labels, nullptr);
        probe.parameters()[i] = saved - step;
        const double down = loss_and_gradient(probe, inputs, labels, nullptr);
        probe.parameters()[i] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double err =
            std::abs(analytic[i] - numeric) / (std::abs(analytic[i]) + std::abs(numeric) + 1e-8);
        worst = std::max(worst, err);
    }
    return worst;
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    if (ds.train.empty()) throw std::invalid_argument("train: empty training split");

    auto model = LstmModel::initialize(cfg.hidden_size, ds.class_names, cfg.seed);
    model.set_normalization(fit_normalization(ds.train));

    const MatrixXd all_inputs = normalized_inputs(model, ds.train);
    const std::vector<int> all_labels = labels_of(model.class_names(), ds.train);
    const auto n = all_labels.size();

    TrainResult result{model, 0.0, {}};
    result.initial_loss = loss_and_gradient(model, all_inputs, all_labels, nullptr);
    result.loss_history.reserve(cfg.epochs);

    // The last batch of an epoch may be shorter; giving it its own workspace
    // keeps both sets of buffers at a fixed size.
    Workspace ws_full, ws_tail;
    VectorXd grad;
    MatrixXd batch_inputs;
    std::vector<int> batch_labels;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto eng = make_stream(cfg.seed, 1);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(std::span<std::size_t>(order), eng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const auto count = std::min(cfg.batch_size, n - start);
            batch_inputs.resize(all_inputs.rows(), static_cast<Eigen::Index>(count));
            batch_labels.resize(count);
            for (std::size_t j = 0; j < count; ++j) {
                batch_inputs.col(static_cast<Eigen::Index>(j)) =
                    all_inputs.col(static_cast<Eigen::Index>(order[start + j]));
                batch_labels[j] = all_labels[order[start + j]];
            }

            Workspace& ws = count == cfg.batch_size ? ws_full : ws_tail;
            ws.run_forward(model, batch_inputs);
            const double loss = ws.loss(batch_labels);
            if (!std::isfinite(loss)) {
                throw NumericalError("training diverged: non-finite loss at epoch " +
                                     std::to_string(epoch + 1));
            }
            ws.run_backward(model, batch_inputs, batch_labels, 1.0, grad);

            const double norm = grad.norm();
            if (!std::isfinite(norm)) {
                throw NumericalError("training diverged: non-finite gradient at epoch " +
                                     std::to_string(epoch + 1));
            }
            double lr = cfg.learning_rate;
            if (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) lr *= cfg.clip_norm / norm;
            model.parameters().noalias() -= lr * grad;

            epoch_loss += loss * static_cast<double>(count);
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(n));
    }
    result.model = std::move(model);
    return result;
}

ConfusionMatrix evaluate(const LstmModel& model, std::span<const TemperatureTrace> traces) {
    ConfusionMatrix cm(model.class_names());
    if (traces.empty()) return cm;
    const auto labels = labels_of(model.class_names(), traces);
    const MatrixXd probs = predict_proba(model, normalized_inputs(model, traces));
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
        Eigen::Index best = 0;
        probs.col(j).maxCoeff(&best);
        cm.add(static_cast<std::size_t>(labels[static_cast<std::size_t>(j)]),
               static_cast<std::size_t>(best));
    }
    return cm;
}

ConfusionMatrix evaluate(const LstmModel& model, const Dataset& ds) {
    if (model.class_names() != ds.class_names) {
        throw std::invalid_argument("model classes do not match dataset classes");
    }
    return evaluate(model, ds.test);
}

// --- checkpoint -------------------------------------------------------------
//
// Little-endian layout:
//   char[8]  magic "TSLSTM\0\0"
//   u32      version
//   u32      input size (1), hidden size, class count
//   f64      normalization mean, normalization scale
//   per class: u32 byte length, UTF-8 name
//   u64      parameter count
//   f64[]    blocks W_in, W_rec, b, W_out, b_out; matrices row-major

namespace {

constexpr char kMagic[8] = {'T', 'S', 'L', 'S', 'T', 'M', '\0', '\0'};

class Writer {
   public:
    explicit Writer(std::ostream& out) : out_(out) {}
    void u32(std::uint32_t v) { bytes(v, 4); }
    void u64(std::uint64_t v) { bytes(v, 8); }
    void f64(double v) { bytes(std::bit_cast<std::uint64_t>(v), 8); }
    void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

   private:
    void bytes(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    std::ostream& out_;
};

class Reader {
   public:
    explicit Reader(std::istream& in) : in_(in) {}
    std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
    std::uint64_t u64() { return bytes(8); }
    double f64() { return std::bit_cast<double>(bytes(8)); }
    void raw(char* p, std::size_t n) {
        in_.read(p, static_cast<std::streamsize>(n));
        if (!in_) throw CheckpointError("checkpoint truncated");
    }

   private:
    std::uint64_t bytes(int n) {
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            const int c = in_.get();
            if (c == std::char_traits<char>::eof()) throw CheckpointError("checkpoint truncated");
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
        }
        return v;
    }
    std::istream& in_;
};

// Visits parameter indices in checkpoint order (matrix blocks row-major).
template <typename Fn>
void for_each_checkpoint_index(const LstmShape& s, Fn&& fn) {
    for (std::size_t i = 0; i < s.gates(); ++i) fn(s.input_weights_offset() + i);
    for (std::size_t r = 0; r < s.gates(); ++r) {
        for (std::size_t c = 0; c < s.hidden; ++c) {
            fn(s.recurrent_weights_offset() + c * s.gates() + r);
        }
    }
    for (std::size_t i = 0; i < s.gates(); ++i) fn(s.bias_offset() + i);
    for (std::size_t r = 0; r < s.classes; ++r) {
        for (std::size_t c = 0; c < s.hidden; ++c) {
            fn(s.output_weights_offset() + c * s.classes + r);
        }
    }
    for (std::size_t i = 0; i < s.classes; ++i) fn(s.output_bias_offset() + i);
}

}  // namespace

void save_model(const LstmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot open '" + path.string() + "' for writing");
    Writer w(out);
    const auto& s = model.shape();
    w.raw(kMagic, sizeof kMagic);
    w.u32(kCheckpointVersion);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(s.hidden));
    w.u32(static_cast<std::uint32_t>(s.classes));
    w.f64(model.normalization().mean);
    w.f64(model.normalization().scale);
    for (const auto& name : model.class_names()) {
        w.u32(static_cast<std::uint32_t>(name.size()));
        w.raw(name.data(), name.size());
    }
    w.u64(s.parameter_count());
    for_each_checkpoint_index(s, [&](std::size_t i) {
        w.f64(model.parameters()[static_cast<Eigen::Index>(i)]);
    });
    if (!out) throw CheckpointError("write to '" + path.string() + "' failed");
}

LstmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open '" + path.string() + "'");
    Reader r(in);
    char magic[8];
    r.raw(magic, sizeof magic);
    if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
        throw CheckpointError("'" + path.string() + "' is not an LSTM checkpoint");
    }
    const auto version = r.u32();
    if (version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    if (r.u32() != 1) throw CheckpointError("checkpoint input size must be 1");
    LstmShape shape;
    shape.hidden = r.u32();
    shape.classes = r.u32();
    if (shape.hidden == 0 || shape.classes == 0 || shape.hidden > 4096 || shape.classes > 4096) {
        throw CheckpointError("implausible checkpoint shape");
    }
    Normalization norm;
    norm.mean = r.f64();
    norm.scale = r.f64();
    std::vector<std::string> names(shape.classes);
    for (auto& name : names) {
        const auto len = r.u32();
        if (len > 4096) throw CheckpointError("implausible class name length");
        name.resize(len);
        r.raw(name.data(), len);
    }
    if (r.u64() != shape.parameter_count()) {
        throw CheckpointError("checkpoint parameter count does not match its shape");
    }
    VectorXd params(static_cast<Eigen::Index>(shape.parameter_count()));
    for_each_checkpoint_index(
        shape, [&](std::size_t i) { params[static_cast<Eigen::Index>(i)] = r.f64(); });
    try {
        return LstmModel(shape, std::move(names), std::move(params), norm);
    } catch (const std::exception& e) {
        throw CheckpointError(std::string("invalid checkpoint: ") + e.what());
    }
}

}  // namespace thermosense
