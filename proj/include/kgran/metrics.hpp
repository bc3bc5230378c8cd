#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "kgran/types.hpp"

namespace kgran {

/// 3x3 counts; rows are gold classes, columns predicted classes.
class ConfusionMatrix {
 public:
  void add(Polarity gold, Polarity predicted) { ++counts_[class_index(gold)][class_index(predicted)]; }
  std::size_t at(Polarity gold, Polarity predicted) const { return counts_[class_index(gold)][class_index(predicted)]; }
  std::size_t& at(Polarity gold, Polarity predicted) { return counts_[class_index(gold)][class_index(predicted)]; }

  std::size_t total() const;
  std::size_t correct() const;
  std::size_t gold_count(Polarity c) const;
  std::size_t predicted_count(Polarity c) const;

  void merge(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts_{};
};

struct Metrics {
  double accuracy = 0;
  double macro_f1 = 0;
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  std::array<double, kNumClasses> f1{};
  ConfusionMatrix confusion;
};

/// Acc = correct / total; P_l = true_l / predicted_l (0 if nothing predicted),
/// R_l = true_l / gold_l, F1_l = 2PR / (P + R) (0 if P + R = 0), Mac-F1 = mean F1_l.
/// Throws std::invalid_argument on an empty matrix.
Metrics compute_metrics(const ConfusionMatrix& confusion);

ConfusionMatrix confusion_from(std::span<const Polarity> gold, std::span<const Polarity> predicted);

/// Line-structured metric file; see README for the schema.
std::string format_metrics(const Metrics& metrics);

}  // namespace kgran
