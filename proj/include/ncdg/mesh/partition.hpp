#pragma once

#include "ncdg/mesh/forest.hpp"

#include <span>
#include <vector>

namespace ncdg {

// Contiguous chunks of the Morton-ordered leaf list.
struct Partition {
  int workers = 1;
  std::vector<int> owner;                 // per leaf
  std::vector<int> begin;                 // per worker, first leaf (size workers + 1)
  std::vector<std::vector<int>> ghosts;   // per worker, sorted leaf ids owned elsewhere

  int first(int w) const { return begin[w]; }
  int last(int w) const { return begin[w + 1]; }
};

// Splits leaves into `workers` contiguous chunks of near-equal total weight
// (unit weights when `weights` is empty).
Partition partition_leaves(const ForestMesh& mesh, int workers, std::span<const double> weights = {});

// max_p(cost_p) / mean_p(cost_p).
double load_imbalance(const Partition& part, std::span<const double> weights = {});

} // namespace ncdg
