#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgran {

enum class Polarity : int { Positive = 0, Negative = 1, Neutral = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<Polarity, kNumClasses> kAllPolarities = {
    Polarity::Positive, Polarity::Negative, Polarity::Neutral};

inline std::size_t class_index(Polarity p) { return static_cast<std::size_t>(p); }
inline Polarity polarity_from_index(std::size_t i) { return static_cast<Polarity>(i); }

inline std::string_view polarity_name(Polarity p) {
  switch (p) {
    case Polarity::Positive: return "positive";
    case Polarity::Negative: return "negative";
    case Polarity::Neutral: return "neutral";
  }
  return "unknown";
}

std::optional<Polarity> parse_polarity(std::string_view name);

/// Inclusive, 1-based token range of the aspect term.
struct AspectSpan {
  std::size_t start = 1;
  std::size_t end = 1;

  std::size_t length() const { return end - start + 1; }
  bool contains(std::size_t position) const { return position >= start && position <= end; }
  friend bool operator==(const AspectSpan&, const AspectSpan&) = default;
};

struct Sentence {
  std::string id;
  std::vector<std::string> tokens;
  AspectSpan aspect;
  Polarity label = Polarity::Neutral;

  std::vector<std::string> aspect_tokens() const {
    return {tokens.begin() + static_cast<std::ptrdiff_t>(aspect.start - 1),
            tokens.begin() + static_cast<std::ptrdiff_t>(aspect.end)};
  }
};

}  // namespace kgran
