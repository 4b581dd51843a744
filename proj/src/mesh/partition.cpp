#include "ncdg/mesh/partition.hpp"

#include "ncdg/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ncdg {

Partition partition_leaves(const ForestMesh& mesh, int workers, std::span<const double> weights) {
  if (workers < 1)
    throw ConfigError("worker count must be >= 1");
  const int n = mesh.num_leaves();
  if (!weights.empty() && static_cast<int>(weights.size()) != n)
    throw UsageError("partition weights size does not match the leaf count");
  auto weight = [&](int i) { return weights.empty() ? 1.0 : weights[i]; };

  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i)
    prefix[i + 1] = prefix[i] + weight(i);
  const double total = prefix[n];

  Partition p;
  p.workers = workers;
  p.begin.assign(workers + 1, n);
  p.begin[0] = 0;
  for (int w = 1; w < workers; ++w) {
    const double target = total * w / workers;
    // First index whose prefix reaches the target; pick the closer of the two neighbours.
    int k = static_cast<int>(std::lower_bound(prefix.begin(), prefix.end(), target) - prefix.begin());
    if (k > 0 && k <= n && std::abs(prefix[k - 1] - target) <= std::abs(prefix[k] - target))
      --k;
    p.begin[w] = std::clamp(k, p.begin[w - 1], n);
  }
  p.owner.assign(n, 0);
  for (int w = 0; w < workers; ++w)
    for (int i = p.begin[w]; i < p.begin[w + 1]; ++i)
      p.owner[i] = w;

  p.ghosts.assign(workers, {});
  std::vector<std::set<int>> g(workers);
  for (const Face& f : mesh.faces()) {
    if (f.kind == FaceKind::Boundary)
      continue;
    const int a = p.owner[f.left], b = p.owner[f.right];
    if (a != b) {
      g[a].insert(f.right);
      g[b].insert(f.left);
    }
  }
  for (int w = 0; w < workers; ++w)
    p.ghosts[w].assign(g[w].begin(), g[w].end());
  return p;
}

double load_imbalance(const Partition& part, std::span<const double> weights) {
  std::vector<double> cost(part.workers, 0.0);
  for (std::size_t i = 0; i < part.owner.size(); ++i)
    cost[part.owner[i]] += weights.empty() ? 1.0 : weights[i];
  double total = 0.0, mx = 0.0;
  for (double c : cost) {
    total += c;
    mx = std::max(mx, c);
  }
  const double mean = total / part.workers;
  return mean > 0 ? mx / mean : 1.0;
}

} // namespace ncdg
