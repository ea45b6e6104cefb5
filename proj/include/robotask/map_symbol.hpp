#pragma once

#include <string>
#include <vector>

namespace robotask {

/// A named location in the robot's map, e.g. "/eng2/2f/subway-front".
struct MapSymbol {
  std::string name;
  std::string floor;
  double x = 0.0;
  double y = 0.0;
  // Normalised (lowercase, article- and punctuation-free) phrases.
  std::vector<std::string> aliases;
};

}  // namespace robotask

#include <string_view>

namespace robotask {

/// Lowercases, drops punctuation and articles, collapses whitespace. Applied to
/// aliases at load time and to phrases at lookup time.
std::string normalize_location_phrase(std::string_view phrase);

}  // namespace robotask
