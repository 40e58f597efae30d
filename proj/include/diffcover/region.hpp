#pragma once

#include <functional>

#include "diffcover/linalg.hpp"

namespace diffcover {

struct Ball {
  Vec center;
  double radius = 0.0;
  bool contains(const Vec& x) const { return (x - center).norm() < radius; }
};

// Open region given by a membership predicate plus bounding data. All of the
// concrete covers in this library use balls; the predicate form keeps the
// Monte-Carlo surfaces generic (cones, complements, intersections).
struct Region {
  std::function<bool(const Vec&)> contains;
  Ball bound;  // a ball containing the region
  int id = 0;
};

inline Region ball_region(const Vec& center, double radius, int id = 0) {
  Ball b{center, radius};
  return Region{[b](const Vec& x) { return b.contains(x); }, b, id};
}

}  // namespace diffcover
