#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

namespace ncdg {

// A leaf of the forest: `origin` counts cells of size (root cell)/2^level
// from the lower corner of the domain.
struct Leaf {
  int level = 0;
  std::array<std::int64_t, 3> origin{0, 0, 0};
};

enum class FaceKind { Conforming, Hanging, Boundary };

// Interior faces are listed once. A coarse face next to refined neighbours is
// represented by its 2^(d-1) fine sub-faces, each flagged Hanging.
struct Face {
  int left = -1;   // lower-coordinate leaf (the only leaf for Boundary faces)
  int right = -1;  // upper-coordinate leaf, -1 on the boundary
  int axis = 0;
  FaceKind kind = FaceKind::Conforming;
  int boundary_tag = -1;  // 2*axis + (0 low, 1 high)
  int coarse_side = -1;   // Hanging: 0 if `left` is the coarse leaf, 1 if `right` is
  int subface = -1;       // Hanging: bit b set = upper half along the b-th tangential axis
};

// A face seen from one of its leaves.
struct FaceSlot {
  int face = -1;
  int side = 0;       // 0: this leaf is face.left, 1: face.right
  int direction = 0;  // 2*axis + (0 low, 1 high) face of the leaf
  int subface = -1;   // >= 0 when this leaf is the coarse side of a hanging face
};

// Reference-space (pre-terrain) box of a leaf, in meters.
struct LeafBox {
  int index = -1;
  int level = 0;
  std::array<double, 3> lower{0, 0, 0};
  std::array<double, 3> upper{0, 0, 0};
};

// 2:1-balanced forest of quadrilaterals (dim 2) or hexahedra (dim 3) over a
// root grid. The last axis is vertical. Leaves are kept in Morton order.
class ForestMesh {
public:
  ForestMesh(int dim, std::array<double, 3> extents, std::array<int, 3> root_counts,
             std::array<bool, 3> periodic, std::vector<Leaf> leaves);

  int dim() const { return dim_; }
  const std::array<double, 3>& extents() const { return extents_; }
  const std::array<int, 3>& root_counts() const { return root_; }
  const std::array<bool, 3>& periodic() const { return periodic_; }

  int num_leaves() const { return static_cast<int>(leaves_.size()); }
  const std::vector<Leaf>& leaves() const { return leaves_; }
  const Leaf& leaf(int i) const { return leaves_[i]; }
  const std::vector<Face>& faces() const { return faces_; }
  std::span<const FaceSlot> slots(int leaf) const;
  // Position of the leaf's first slot in the global slot numbering.
  int slot_offset(int leaf) const { return slot_offsets_[leaf]; }
  int num_slots() const { return static_cast<int>(slots_.size()); }
  int max_level() const { return max_level_; }

  LeafBox box(int leaf) const;
  // Root cell size along `axis`.
  double root_size(int axis) const { return extents_[axis] / root_[axis]; }

  // Index of the leaf covering lattice cell (level, origin), or -1 if that cell is refined further.
  int find_covering_leaf(int level, std::array<std::int64_t, 3> origin) const;

  int num_interior_faces() const;
  int num_boundary_faces() const;
  int num_hanging_faces() const;  // fine sub-faces
  int num_root_cells() const;

  std::uint64_t fingerprint() const { return fingerprint_; }

private:
  void build_faces();

  int dim_;
  std::array<double, 3> extents_;
  std::array<int, 3> root_;
  std::array<bool, 3> periodic_;
  std::vector<Leaf> leaves_;
  std::vector<Face> faces_;
  std::vector<FaceSlot> slots_;
  std::vector<int> slot_offsets_;
  std::unordered_map<std::uint64_t, int> lookup_;
  int max_level_ = 0;
  std::uint64_t fingerprint_ = 0;
};

ForestMesh build_uniform_mesh(int dim, std::array<double, 3> extents, std::array<int, 3> elements_per_axis,
                              std::array<bool, 3> periodic = {false, false, false});

// Refines every leaf selected by `predicate`, `times` times, then restores 2:1 balance.
ForestMesh refine_region(const ForestMesh& mesh, const std::function<bool(const LeafBox&)>& predicate,
                         int times = 1);

// Plain-text dump/restore (format version 1). Faces are regenerated on load.
void write_mesh(std::ostream& os, const ForestMesh& mesh);
ForestMesh read_mesh(std::istream& is);

// Morton key of a leaf's origin scaled to `max_level`.
std::uint64_t morton_key(const Leaf& leaf, int dim, int max_level);

} // namespace ncdg
