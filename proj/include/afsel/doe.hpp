#pragma once

#include <vector>

#include "afsel/bbob.hpp"
#include "afsel/rng.hpp"

namespace afsel::doe {

// Stream identity for one initial design.  Deliberately excludes the schedule
// so every schedule run of the same (function, instance, seed) shares the
// exact same design.
struct DesignKey {
  int function_id = 0;
  int instance_id = 0;
  int seed = 0;
  StreamKey stream;

  friend bool operator==(const DesignKey& a, const DesignKey& b) {
    return a.stream == b.stream;
  }
};

DesignKey design_key(int function_id, int instance_id, int seed);

struct Design {
  std::vector<std::vector<double>> points;
  std::vector<double> values;
  struct Meta {
    int function_id = 0;
    int instance_id = 0;
    int dim = 0;
    int seed = 0;
    int size = 0;
  } meta;
};

// Latin hypercube sample over the problem box, evaluated on the problem.
// Each coordinate column hits every one of the `size` equal strata exactly
// once, which also rules out duplicate points.
Design sample_design(const bbob::Problem& problem, int size, const DesignKey& key);

}  // namespace afsel::doe
