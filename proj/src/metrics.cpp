#include "thermosense/metrics.hpp"

#include <limits>
#include <ostream>
#include <stdexcept>

namespace thermosense {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names)
    : names_(std::move(class_names)), counts_(names_.size() * names_.size(), 0) {
    if (names_.empty()) throw std::invalid_argument("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
    if (truth >= names_.size() || predicted >= names_.size()) {
        throw std::out_of_range("confusion matrix class index out of range");
    }
    ++counts_[truth * names_.size() + predicted];
}

std::uint64_t ConfusionMatrix::count(std::size_t truth, std::size_t predicted) const {
    if (truth >= names_.size() || predicted >= names_.size()) {
        throw std::out_of_range("confusion matrix index out of range");
    }
    return counts_[truth * names_.size() + predicted];
}

std::uint64_t ConfusionMatrix::row_total(std::size_t truth) const {
    std::uint64_t sum = 0;
    for (std::size_t p = 0; p < names_.size(); ++p) sum += count(truth, p);
    return sum;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t sum = 0;
    for (auto c : counts_) sum += c;
    return sum;
}

std::uint64_t ConfusionMatrix::correct() const {
    std::uint64_t sum = 0;
    for (std::size_t k = 0; k < names_.size(); ++k) sum += count(k, k);
    return sum;
}

double ConfusionMatrix::accuracy() const {
    const auto n = total();
    return n == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(n);
}

void ConfusionMatrix::write_csv(std::ostream& out) const {
    out << "true\\predicted";
    for (const auto& n : names_) out << ',' << n;
    out << '\n';
    for (std::size_t t = 0; t < names_.size(); ++t) {
        out << names_[t];
        for (std::size_t p = 0; p < names_.size(); ++p) out << ',' << count(t, p);
        out << '\n';
    }
}

namespace {

std::size_t label_index(const std::vector<std::string>& names, const std::string& label) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == label) return i;
    }
    throw std::invalid_argument("trace label '" + label + "' is not among the classes");
}

}  // namespace

ConfusionMatrix nearest_centroid_classify(std::span<const TemperatureTrace> train,
                                          std::span<const TemperatureTrace> test,
                                          const std::vector<std::string>& class_names) {
    ConfusionMatrix cm(class_names);
    if (train.empty()) throw std::invalid_argument("nearest centroid: empty training set");
    const std::size_t length = train.front().samples.size();
    const std::size_t k = class_names.size();

    std::vector<std::vector<double>> centroids(k, std::vector<double>(length, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (const auto& t : train) {
        if (t.samples.size() != length) {
            throw std::invalid_argument("nearest centroid: traces differ in length");
        }
        const auto c = label_index(class_names, t.label);
        for (std::size_t i = 0; i < length; ++i) centroids[c][i] += t.samples[i];
        ++counts[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (auto& v : centroids[c]) v /= static_cast<double>(counts[c]);
    }

    for (const auto& t : test) {
        if (t.samples.size() != length) {
            throw std::invalid_argument("nearest centroid: traces differ in length");
        }
        const auto truth = label_index(class_names, t.label);
        std::size_t best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            double d = 0.0;
            for (std::size_t i = 0; i < length; ++i) {
                const double diff = t.samples[i] - centroids[c][i];
                d += diff * diff;
            }
            if (d < best_dist) {
                best_dist = d;
                best = c;
            }
        }
        cm.add(truth, best);
    }
    return cm;
}

}  // namespace thermosense
