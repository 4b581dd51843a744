#pragma once

#include <stdexcept>
#include <string>

namespace ncdg {

// Invalid user-supplied configuration (extents, tolerances, presets, ...).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Mesh mapping produced an inverted or degenerate element.
class GeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Non-finite or otherwise unusable input data.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// API misuse: mismatched meshes, planes outside the domain, ...
class UsageError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// Internal invariant broken (e.g. missing neighbour data).
class ConsistencyError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// Density or pressure dropped to zero or below.
class PositivityError : public std::runtime_error {
public:
  PositivityError(const std::string& what, int leaf, int node)
      : std::runtime_error(what + " (leaf " + std::to_string(leaf) + ", node " + std::to_string(node) + ")"),
        leaf_(leaf), node_(node) {}
  int leaf() const { return leaf_; }
  int node() const { return node_; }

private:
  int leaf_;
  int node_;
};

// Fixed-point or Krylov iteration did not converge.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace ncdg
