#include "kgran/trace.hpp"

#include <cstdio>
#include <stdexcept>

namespace kgran {

namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

AspectSpan find_aspect(const std::vector<std::string>& tokens, const std::vector<std::string>& aspect) {
  if (aspect.empty()) throw std::invalid_argument("empty aspect");
  for (std::size_t s = 0; s + aspect.size() <= tokens.size(); ++s) {
    bool match = true;
    for (std::size_t k = 0; k < aspect.size() && match; ++k) match = tokens[s + k] == aspect[k];
    if (match) return {s + 1, s + aspect.size()};
  }
  std::string joined;
  for (const auto& a : aspect) joined += (joined.empty() ? "" : " ") + a;
  throw std::invalid_argument("aspect '" + joined + "' not found in sentence");
}

std::string format_trace(const AttentionTrace& trace) {
  std::string out = "# kgran attention trace v1\ntokens";
  for (const auto& t : trace.tokens) out += "\t" + t;
  out += "\naspect\t" + std::to_string(trace.span.start) + "\t" + std::to_string(trace.span.end) + "\n";
  for (std::size_t t = 0; t < trace.layers.size(); ++t) {
    out += "layer\t" + std::to_string(t + 1);
    for (double w : trace.layers[t]) out += "\t" + number(w);
    out += "\n";
  }
  for (const auto& row : trace.knowledge) {
    out += "knowledge\t" + std::to_string(row.position) + "\tbeta=" + number(row.beta);
    for (std::size_t k = 0; k < row.lemmas.size(); ++k) out += "\t" + row.lemmas[k] + "=" + number(row.alphas[k]);
    out += "\n";
  }
  out += "episode";
  for (double e : trace.episode) out += "\t" + number(e);
  out += "\nprediction";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out += std::string("\t") + std::string(polarity_name(polarity_from_index(c))) + "=" + number(trace.probabilities[c]);
  }
  out += std::string("\npredicted\t") + std::string(polarity_name(trace.predicted)) + "\n";
  return out;
}

}  // namespace kgran
