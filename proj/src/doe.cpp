#include "afsel/doe.hpp"

#include <stdexcept>

namespace afsel::doe {

namespace {
constexpr std::uint64_t kDesignSeed = 0xd6e8feb86659fd93ULL;
}

DesignKey design_key(int function_id, int instance_id, int seed) {
  DesignKey key;
  key.function_id = function_id;
  key.instance_id = instance_id;
  key.seed = seed;
  key.stream = derive(StreamKey{kDesignSeed}, function_id, instance_id, seed);
  return key;
}

Design sample_design(const bbob::Problem& problem, int size, const DesignKey& key) {
  if (size < 2) throw std::invalid_argument("design needs at least 2 points");

  const int dim = problem.dim();
  Rng rng(key.stream);

  Design design;
  design.points.assign(static_cast<std::size_t>(size), std::vector<double>(dim));
  const double width = (bbob::kUpperBound - bbob::kLowerBound) / size;
  for (int j = 0; j < dim; ++j) {
    const std::vector<int> strata = rng.permutation(size);
    for (int i = 0; i < size; ++i) {
      const double u = rng.uniform();
      design.points[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          bbob::kLowerBound + width * (strata[static_cast<std::size_t>(i)] + u);
    }
  }

  design.values.resize(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    design.values[static_cast<std::size_t>(i)] = problem.evaluate(design.points[static_cast<std::size_t>(i)]);
  }

  design.meta = {problem.function_id(), problem.instance_id(), dim, key.seed, size};
  return design;
}

}  // namespace afsel::doe
