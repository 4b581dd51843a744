#pragma once

#include "ncdg/dg/basis.hpp"
#include "ncdg/mesh/forest.hpp"

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ncdg {

using HeightFunction = std::function<double(double x, double y)>;

// Decaying terrain-following map z = z_ref + h(x,y) (1 - z_ref/z_top).
//
// The surface height is interpolated with degree `degree` on every root cell
// footprint; refined leaves evaluate the root polynomial, so all leaves of one
// root cell share one polynomial map and every face (hanging or not) is
// watertight.
class TerrainMapping {
public:
  TerrainMapping(const ForestMesh& mesh, HeightFunction height, double z_top, int degree);
  // Flat terrain: affine map.
  explicit TerrainMapping(const ForestMesh& mesh);

  bool flat() const { return flat_; }
  int degree() const { return degree_; }
  double z_top() const { return z_top_; }

  // Discrete height and its horizontal gradient at a horizontal position.
  double height(double x, double y) const;
  std::array<double, 2> height_gradient(double x, double y) const;

  // Physical point and Jacobian dx/dxi (row = physical axis) for reference point xi of a leaf.
  std::array<double, 3> map(const LeafBox& box, const std::array<double, 3>& xi) const;
  std::array<double, 9> jacobian(const LeafBox& box, const std::array<double, 3>& xi) const;

  // Inverse of the vertical map at fixed horizontal position.
  double reference_height(double x, double y, double z) const;

private:
  int footprint(double x, double y, double& s, double& t) const;

  int dim_;
  bool flat_ = true;
  int degree_ = 1;
  double z_top_ = 1.0;
  std::array<double, 2> root_size_{1, 1};
  std::array<int, 2> root_count_{1, 1};
  std::vector<double> gll_;
  std::vector<double> coeffs_;  // per root footprint: nodal heights, first axis fastest
};

// Precomputed per-leaf metric data at the solution basis' nodes and quadrature points.
class MeshGeometry {
public:
  MeshGeometry(const ForestMesh& mesh, const ReferenceBasis& basis, const TerrainMapping& mapping);

  const ForestMesh& mesh() const { return *mesh_; }
  const ReferenceBasis& basis() const { return *basis_; }
  const TerrainMapping& mapping() const { return *mapping_; }
  int dim() const { return dim_; }
  int nodes_per_leaf() const { return nn_; }
  int qpoints_per_leaf() const { return nqv_; }
  int qpoints_per_face() const { return nfq_; }

  // [node][d]
  std::span<const double> node_coords(int leaf) const { return {&coords_[leaf * nn_ * dim_], std::size_t(nn_ * dim_)}; }
  // [q] w_q det J
  std::span<const double> jxw(int leaf) const { return {&jxw_[leaf * nqv_], std::size_t(nqv_)}; }
  // [q] det J
  std::span<const double> detj(int leaf) const { return {&detj_[leaf * nqv_], std::size_t(nqv_)}; }
  // [q][a][b] = w_q det J dxi_a/dx_b
  std::span<const double> metric(int leaf) const {
    return {&metric_[leaf * nqv_ * dim_ * dim_], std::size_t(nqv_ * dim_ * dim_)};
  }
  // Per global slot (see ForestMesh::slot_offset): unit outward normals [fq][d],
  // w * surface Jacobian [fq], coordinates [fq][d].
  std::span<const double> normals(int slot) const { return {&normals_[slot * nfq_ * dim_], std::size_t(nfq_ * dim_)}; }
  std::span<const double> face_jxw(int slot) const { return {&face_jxw_[slot * nfq_], std::size_t(nfq_)}; }
  std::span<const double> face_coords(int slot) const {
    return {&face_coords_[slot * nfq_ * dim_], std::size_t(nfq_ * dim_)};
  }

  double diameter(int leaf) const { return diameter_[leaf]; }
  double min_diameter() const;
  double volume() const;

  // Applies the inverse element mass matrix to `nvar` consecutive nodal blocks in place.
  void apply_mass_inverse(int leaf, double* data, int nvar) const;
  // Element mass matrix action (used by tests and the block preconditioner).
  void apply_mass(int leaf, double* data, int nvar) const;

  // Leaf containing physical point x (lowest index on ties) and its reference coordinates.
  std::optional<std::pair<int, std::array<double, 3>>> locate(const std::array<double, 3>& x) const;

private:
  void build_mass(int leaf);

  const ForestMesh* mesh_;
  const ReferenceBasis* basis_;
  const TerrainMapping* mapping_;
  int dim_;
  int n_;
  int nq_;
  int nn_;
  int nqv_;
  int nfq_;
  std::vector<double> coords_, jxw_, detj_, metric_;
  std::vector<double> normals_, face_jxw_, face_coords_;
  std::vector<double> diameter_;
  // Mass matrices factor as (horizontal part) x (1D vertical part) because det J
  // does not depend on the vertical reference coordinate.
  int nh_;
  std::vector<double> mass_h_inv_, mass_h_;  // per leaf, nh x nh
  std::vector<double> mass_z_inv_, mass_z_;  // n x n, shared
};

} // namespace ncdg
