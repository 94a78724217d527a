#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "thermosense/episodes.hpp"

namespace thermosense {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
   public:
    explicit ConfusionMatrix(std::vector<std::string> class_names);

    void add(std::size_t truth, std::size_t predicted);

    std::size_t num_classes() const noexcept { return names_.size(); }
    const std::vector<std::string>& class_names() const noexcept { return names_; }
    std::uint64_t count(std::size_t truth, std::size_t predicted) const;
    std::uint64_t row_total(std::size_t truth) const;
    std::uint64_t total() const;
    std::uint64_t correct() const;
    /// trace / total; 0 for an empty matrix.
    double accuracy() const;

    void write_csv(std::ostream& out) const;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

   private:
    std::vector<std::string> names_;
    std::vector<std::uint64_t> counts_;  // row-major
};

/// Assigns each test trace the class whose mean training trace is nearest in
/// Euclidean distance. Classes without training traces are never predicted.
ConfusionMatrix nearest_centroid_classify(std::span<const TemperatureTrace> train,
                                          std::span<const TemperatureTrace> test,
                                          const std::vector<std::string>& class_names);

}  // namespace thermosense
