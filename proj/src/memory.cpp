#include "kgran/memory.hpp"

#include <stdexcept>
#include <string>

namespace kgran {

std::size_t relative_distance(std::size_t position, const AspectSpan& span, std::size_t length) {
  if (position < 1 || position > length) {
    throw std::out_of_range("relative_distance: position " + std::to_string(position) + " outside 1.." +
                            std::to_string(length));
  }
  if (span.start < 1 || span.end < span.start || span.end > length) {
    throw std::out_of_range("relative_distance: aspect span outside sentence");
  }
  if (position < span.start) return span.start - position;
  if (position > span.end) return position - span.end;
  return 0;
}

}  // namespace kgran
