#include "kgran/metrics.hpp"

#include <cstdio>
#include <stdexcept>

namespace kgran {

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts_) {
    for (std::size_t v : row) n += v;
  }
  return n;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) n += counts_[i][i];
  return n;
}

std::size_t ConfusionMatrix::gold_count(Polarity c) const {
  std::size_t n = 0;
  for (std::size_t v : counts_[class_index(c)]) n += v;
  return n;
}

std::size_t ConfusionMatrix::predicted_count(Polarity c) const {
  std::size_t n = 0;
  for (const auto& row : counts_) n += row[class_index(c)];
  return n;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    for (std::size_t j = 0; j < kNumClasses; ++j) counts_[i][j] += other.counts_[i][j];
  }
}

Metrics compute_metrics(const ConfusionMatrix& confusion) {
  const std::size_t total = confusion.total();
  if (total == 0) throw std::invalid_argument("metrics: no evaluated samples");
  Metrics m;
  m.confusion = confusion;
  m.accuracy = static_cast<double>(confusion.correct()) / static_cast<double>(total);
  double f1_sum = 0.0;
  for (Polarity c : kAllPolarities) {
    const std::size_t k = class_index(c);
    const auto tp = static_cast<double>(confusion.at(c, c));
    const auto predicted = static_cast<double>(confusion.predicted_count(c));
    const auto gold = static_cast<double>(confusion.gold_count(c));
    m.precision[k] = predicted > 0 ? tp / predicted : 0.0;
    m.recall[k] = gold > 0 ? tp / gold : 0.0;
    const double pr = m.precision[k] + m.recall[k];
    m.f1[k] = pr > 0 ? 2.0 * m.precision[k] * m.recall[k] / pr : 0.0;
    f1_sum += m.f1[k];
  }
  m.macro_f1 = f1_sum / static_cast<double>(kNumClasses);
  return m;
}

ConfusionMatrix confusion_from(std::span<const Polarity> gold, std::span<const Polarity> predicted) {
  if (gold.size() != predicted.size()) throw std::invalid_argument("confusion: label counts differ");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) cm.add(gold[i], predicted[i]);
  return cm;
}

std::string format_metrics(const Metrics& m) {
  std::string out = "# kgran metrics v1\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "samples\t%zu\n", m.confusion.total());
  out += buf;
  std::snprintf(buf, sizeof buf, "accuracy\t%.9g\n", m.accuracy);
  out += buf;
  std::snprintf(buf, sizeof buf, "macro_f1\t%.9g\n", m.macro_f1);
  out += buf;
  for (Polarity c : kAllPolarities) {
    const std::size_t k = class_index(c);
    std::snprintf(buf, sizeof buf, "class\t%s\tprecision=%.9g\trecall=%.9g\tf1=%.9g\n",
                  std::string(polarity_name(c)).c_str(), m.precision[k], m.recall[k], m.f1[k]);
    out += buf;
  }
  for (Polarity g : kAllPolarities) {
    std::snprintf(buf, sizeof buf, "confusion\t%s\t%zu\t%zu\t%zu\n", std::string(polarity_name(g)).c_str(),
                  m.confusion.at(g, Polarity::Positive), m.confusion.at(g, Polarity::Negative),
                  m.confusion.at(g, Polarity::Neutral));
    out += buf;
  }
  return out;
}

}  // namespace kgran
