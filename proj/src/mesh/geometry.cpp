#include "ncdg/mesh/geometry.hpp"

#include "ncdg/common/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ncdg {

namespace {

void invert(const std::array<double, 9>& j, int dim, std::array<double, 9>& inv, double& det) {
  inv.fill(0.0);
  if (dim == 2) {
    det = j[0] * j[4] - j[1] * j[3];
    inv[0] = j[4] / det;
    inv[1] = -j[1] / det;
    inv[3] = -j[3] / det;
    inv[4] = j[0] / det;
    return;
  }
  det = j[0] * (j[4] * j[8] - j[5] * j[7]) - j[1] * (j[3] * j[8] - j[5] * j[6]) + j[2] * (j[3] * j[7] - j[4] * j[6]);
  inv[0] = (j[4] * j[8] - j[5] * j[7]) / det;
  inv[1] = (j[2] * j[7] - j[1] * j[8]) / det;
  inv[2] = (j[1] * j[5] - j[2] * j[4]) / det;
  inv[3] = (j[5] * j[6] - j[3] * j[8]) / det;
  inv[4] = (j[0] * j[8] - j[2] * j[6]) / det;
  inv[5] = (j[2] * j[3] - j[0] * j[5]) / det;
  inv[6] = (j[3] * j[7] - j[4] * j[6]) / det;
  inv[7] = (j[1] * j[6] - j[0] * j[7]) / det;
  inv[8] = (j[0] * j[4] - j[1] * j[3]) / det;
}

int ipow(int b, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i)
    r *= b;
  return r;
}

} // namespace

TerrainMapping::TerrainMapping(const ForestMesh& mesh) : dim_(mesh.dim()) {
  z_top_ = mesh.extents()[dim_ - 1];
}

TerrainMapping::TerrainMapping(const ForestMesh& mesh, HeightFunction height, double z_top, int degree)
    : dim_(mesh.dim()), flat_(!height), degree_(degree), z_top_(z_top) {
  if (!height)
    return;
  if (degree < 1)
    throw ConfigError("geometric degree must be >= 1");
  if (!(z_top > 0.0))
    throw ConfigError("terrain mapping: z_top must be positive");
  gll_ = gauss_lobatto(degree + 1).points;
  const int nh = dim_ - 1;
  for (int a = 0; a < nh; ++a) {
    root_size_[a] = mesh.root_size(a);
    root_count_[a] = mesh.root_counts()[a];
  }
  const int n = degree + 1;
  const int per_cell = nh == 1 ? n : n * n;
  const int ncells = root_count_[0] * (nh == 2 ? root_count_[1] : 1);
  coeffs_.resize(static_cast<std::size_t>(per_cell) * ncells);
  for (int cj = 0; cj < (nh == 2 ? root_count_[1] : 1); ++cj)
    for (int ci = 0; ci < root_count_[0]; ++ci) {
      const int cell = ci + root_count_[0] * cj;
      for (int j = 0; j < (nh == 2 ? n : 1); ++j)
        for (int i = 0; i < n; ++i) {
          const double x = (ci + gll_[i]) * root_size_[0];
          const double y = nh == 2 ? (cj + gll_[j]) * root_size_[1] : 0.0;
          const double h = height(x, y);
          if (!std::isfinite(h))
            throw InputError("terrain height is not finite");
          if (h >= z_top)
            throw ConfigError("terrain height reaches z_top");
          coeffs_[cell * per_cell + i + n * j] = h;
        }
    }
}

int TerrainMapping::footprint(double x, double y, double& s, double& t) const {
  const int nh = dim_ - 1;
  int ci = static_cast<int>(std::floor(x / root_size_[0]));
  ci = std::clamp(ci, 0, root_count_[0] - 1);
  s = x / root_size_[0] - ci;
  int cj = 0;
  t = 0.0;
  if (nh == 2) {
    cj = std::clamp(static_cast<int>(std::floor(y / root_size_[1])), 0, root_count_[1] - 1);
    t = y / root_size_[1] - cj;
  }
  return ci + root_count_[0] * cj;
}

double TerrainMapping::height(double x, double y) const {
  if (flat_)
    return 0.0;
  double s, t;
  const int cell = footprint(x, y, s, t);
  const int n = degree_ + 1;
  std::vector<double> ps(n), pt(n, 0.0);
  lagrange_values(gll_, s, ps.data());
  if (dim_ == 3)
    lagrange_values(gll_, t, pt.data());
  else
    pt[0] = 1.0;
  const int per_cell = dim_ == 2 ? n : n * n;
  const double* c = &coeffs_[cell * per_cell];
  double h = 0.0;
  for (int j = 0; j < (dim_ == 3 ? n : 1); ++j)
    for (int i = 0; i < n; ++i)
      h += c[i + n * j] * ps[i] * pt[j];
  return h;
}

std::array<double, 2> TerrainMapping::height_gradient(double x, double y) const {
  if (flat_)
    return {0.0, 0.0};
  double s, t;
  const int cell = footprint(x, y, s, t);
  const int n = degree_ + 1;
  std::vector<double> ps(n), pt(n, 0.0), ds(n), dt(n, 0.0);
  lagrange_values(gll_, s, ps.data());
  lagrange_derivatives(gll_, s, ds.data());
  if (dim_ == 3) {
    lagrange_values(gll_, t, pt.data());
    lagrange_derivatives(gll_, t, dt.data());
  } else {
    pt[0] = 1.0;
  }
  const int per_cell = dim_ == 2 ? n : n * n;
  const double* c = &coeffs_[cell * per_cell];
  std::array<double, 2> g{0.0, 0.0};
  for (int j = 0; j < (dim_ == 3 ? n : 1); ++j)
    for (int i = 0; i < n; ++i) {
      g[0] += c[i + n * j] * ds[i] * pt[j];
      g[1] += c[i + n * j] * ps[i] * dt[j];
    }
  g[0] /= root_size_[0];
  if (dim_ == 3)
    g[1] /= root_size_[1];
  return g;
}

std::array<double, 3> TerrainMapping::map(const LeafBox& box, const std::array<double, 3>& xi) const {
  std::array<double, 3> x{0, 0, 0};
  for (int a = 0; a < dim_; ++a)
    x[a] = box.lower[a] + xi[a] * (box.upper[a] - box.lower[a]);
  if (!flat_) {
    const int v = dim_ - 1;
    const double h = height(x[0], dim_ == 3 ? x[1] : 0.0);
    x[v] = x[v] + h * (1.0 - x[v] / z_top_);
  }
  return x;
}

std::array<double, 9> TerrainMapping::jacobian(const LeafBox& box, const std::array<double, 3>& xi) const {
  std::array<double, 9> j{};
  for (int a = 0; a < dim_; ++a)
    j[a * 3 + a] = box.upper[a] - box.lower[a];
  if (flat_)
    return j;
  const int v = dim_ - 1;
  std::array<double, 3> x{0, 0, 0};
  for (int a = 0; a < dim_; ++a)
    x[a] = box.lower[a] + xi[a] * (box.upper[a] - box.lower[a]);
  const double y = dim_ == 3 ? x[1] : 0.0;
  const double h = height(x[0], y);
  const auto g = height_gradient(x[0], y);
  const double decay = 1.0 - x[v] / z_top_;
  for (int a = 0; a < v; ++a)
    j[v * 3 + a] = (box.upper[a] - box.lower[a]) * g[a] * decay;
  j[v * 3 + v] = (box.upper[v] - box.lower[v]) * (1.0 - h / z_top_);
  return j;
}

double TerrainMapping::reference_height(double x, double y, double z) const {
  if (flat_)
    return z;
  const double h = height(x, y);
  return (z - h) / (1.0 - h / z_top_);
}

MeshGeometry::MeshGeometry(const ForestMesh& mesh, const ReferenceBasis& basis, const TerrainMapping& mapping)
    : mesh_(&mesh), basis_(&basis), mapping_(&mapping), dim_(mesh.dim()), n_(basis.n()), nq_(basis.nq()) {
  nn_ = ipow(n_, dim_);
  nqv_ = ipow(nq_, dim_);
  nfq_ = ipow(nq_, dim_ - 1);
  nh_ = ipow(n_, dim_ - 1);
  const int nl = mesh.num_leaves();
  coords_.resize(std::size_t(nl) * nn_ * dim_);
  jxw_.resize(std::size_t(nl) * nqv_);
  detj_.resize(std::size_t(nl) * nqv_);
  metric_.resize(std::size_t(nl) * nqv_ * dim_ * dim_);
  normals_.resize(std::size_t(mesh.num_slots()) * nfq_ * dim_);
  face_jxw_.resize(std::size_t(mesh.num_slots()) * nfq_);
  face_coords_.resize(std::size_t(mesh.num_slots()) * nfq_ * dim_);
  diameter_.resize(nl);
  mass_h_inv_.resize(std::size_t(nl) * nh_ * nh_);
  mass_h_.resize(std::size_t(nl) * nh_ * nh_);

  const auto& gll = basis.nodes();
  const auto& gp = basis.qpoints();
  const auto& gw = basis.qweights();
  auto unpack = [&](int idx, int k, std::array<int, 3>& ijk) {
    ijk = {idx % k, (idx / k) % k, dim_ == 3 ? idx / (k * k) : 0};
  };

  for (int e = 0; e < nl; ++e) {
    const LeafBox box = mesh.box(e);
    std::array<int, 3> ijk;
    for (int i = 0; i < nn_; ++i) {
      unpack(i, n_, ijk);
      std::array<double, 3> xi{gll[ijk[0]], gll[ijk[1]], dim_ == 3 ? gll[ijk[2]] : 0.0};
      const auto x = mapping.map(box, xi);
      for (int b = 0; b < dim_; ++b)
        coords_[(std::size_t(e) * nn_ + i) * dim_ + b] = x[b];
      const auto jac = mapping.jacobian(box, xi);
      std::array<double, 9> inv;
      double det;
      invert(jac, dim_, inv, det);
      if (!(det > 0.0)) {
        std::ostringstream os;
        os << "non-positive Jacobian determinant " << det << " at node " << i << " of leaf " << e;
        throw GeometryError(os.str());
      }
    }
    for (int q = 0; q < nqv_; ++q) {
      unpack(q, nq_, ijk);
      std::array<double, 3> xi{gp[ijk[0]], gp[ijk[1]], dim_ == 3 ? gp[ijk[2]] : 0.0};
      double w = gw[ijk[0]] * gw[ijk[1]] * (dim_ == 3 ? gw[ijk[2]] : 1.0);
      const auto jac = mapping.jacobian(box, xi);
      std::array<double, 9> inv;
      double det;
      invert(jac, dim_, inv, det);
      if (!(det > 0.0)) {
        std::ostringstream os;
        os << "non-positive Jacobian determinant " << det << " at quadrature point " << q << " of leaf " << e;
        throw GeometryError(os.str());
      }
      detj_[std::size_t(e) * nqv_ + q] = det;
      jxw_[std::size_t(e) * nqv_ + q] = w * det;
      for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b)
          metric_[((std::size_t(e) * nqv_ + q) * dim_ + a) * dim_ + b] = w * det * inv[a * 3 + b];
    }
    // Faces.
    const auto slots = mesh.slots(e);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      const FaceSlot& s = slots[k];
      const int gs = mesh.slot_offset(e) + static_cast<int>(k);
      const int axis = s.direction / 2;
      const int side = s.direction % 2;
      int tang[2] = {-1, -1};
      int nt = 0;
      for (int a = 0; a < dim_; ++a)
        if (a != axis)
          tang[nt++] = a;
      for (int f = 0; f < nfq_; ++f) {
        const int q0 = f % nq_, q1 = f / nq_;
        std::array<double, 3> xi{0, 0, 0};
        xi[axis] = side;
        double w = 1.0;
        const int qt[2] = {q0, q1};
        for (int t = 0; t < nt; ++t) {
          double p = gp[qt[t]];
          double wt = gw[qt[t]];
          if (s.subface >= 0) {
            const int bit = (s.subface >> t) & 1;
            p = 0.5 * (p + bit);
            wt *= 0.5;
          }
          xi[tang[t]] = p;
          w *= wt;
        }
        const auto jac = mapping.jacobian(box, xi);
        std::array<double, 9> inv;
        double det;
        invert(jac, dim_, inv, det);
        if (!(det > 0.0))
          throw GeometryError("non-positive Jacobian determinant on a face of leaf " + std::to_string(e));
        const double sgn = side == 1 ? 1.0 : -1.0;
        double nv[3] = {0, 0, 0};
        double norm = 0.0;
        for (int b = 0; b < dim_; ++b) {
          nv[b] = sgn * det * inv[axis * 3 + b];
          norm += nv[b] * nv[b];
        }
        norm = std::sqrt(norm);
        const auto x = mapping.map(box, xi);
        for (int b = 0; b < dim_; ++b) {
          normals_[(std::size_t(gs) * nfq_ + f) * dim_ + b] = nv[b] / norm;
          face_coords_[(std::size_t(gs) * nfq_ + f) * dim_ + b] = x[b];
        }
        face_jxw_[std::size_t(gs) * nfq_ + f] = w * norm;
      }
    }
    // Diameter: largest distance between mapped vertices.
    std::vector<std::array<double, 3>> verts;
    for (int c = 0; c < (1 << dim_); ++c) {
      std::array<double, 3> xi{double(c & 1), double((c >> 1) & 1), double((c >> 2) & 1)};
      if (dim_ == 2)
        xi[2] = 0.0;
      verts.push_back(mapping.map(box, xi));
    }
    double dmax = 0.0;
    for (std::size_t a = 0; a < verts.size(); ++a)
      for (std::size_t b = a + 1; b < verts.size(); ++b) {
        double d2 = 0.0;
        for (int k = 0; k < dim_; ++k)
          d2 += (verts[a][k] - verts[b][k]) * (verts[a][k] - verts[b][k]);
        dmax = std::max(dmax, std::sqrt(d2));
      }
    diameter_[e] = dmax;
    build_mass(e);
  }
  // Shared vertical 1D mass.
  mass_z_.assign(std::size_t(n_) * n_, 0.0);
  const double* I = basis.interp();
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int q = 0; q < nq_; ++q)
        mass_z_[i * n_ + j] += gw[q] * I[q * n_ + i] * I[q * n_ + j];
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mz(mass_z_.data(), n_, n_);
  mass_z_inv_.resize(std::size_t(n_) * n_);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mzi(mass_z_inv_.data(), n_, n_);
  mzi = mz.inverse();
}

void MeshGeometry::build_mass(int e) {
  // Horizontal factor: sum over horizontal quadrature points of w_h detJ phi phi.
  const auto& gw = basis_->qweights();
  const double* I = basis_->interp();
  const int nhd = dim_ - 1;
  double* mh = &mass_h_[std::size_t(e) * nh_ * nh_];
  std::fill(mh, mh + nh_ * nh_, 0.0);
  const int nqh = nhd == 1 ? nq_ : nq_ * nq_;
  for (int qh = 0; qh < nqh; ++qh) {
    // detJ does not depend on the vertical index; use the first vertical quadrature point.
    const int q0 = qh % nq_, q1 = qh / nq_;
    double wh = gw[q0] * (nhd == 2 ? gw[q1] : 1.0);
    const double det = detj_[std::size_t(e) * nqv_ + qh];
    for (int i = 0; i < nh_; ++i) {
      const int i0 = i % n_, i1 = i / n_;
      const double pi = I[q0 * n_ + i0] * (nhd == 2 ? I[q1 * n_ + i1] : 1.0);
      if (pi == 0.0)
        continue;
      for (int j = 0; j < nh_; ++j) {
        const int j0 = j % n_, j1 = j / n_;
        const double pj = I[q0 * n_ + j0] * (nhd == 2 ? I[q1 * n_ + j1] : 1.0);
        mh[i * nh_ + j] += wh * det * pi * pj;
      }
    }
  }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(mh, nh_, nh_);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mi(
      &mass_h_inv_[std::size_t(e) * nh_ * nh_], nh_, nh_);
  mi = m.inverse();
}

namespace {

// data[iv * nh + ih] <- (Z (x) H) data, with Z acting on the vertical index.
void kron_apply(const double* h, const double* z, int nh, int n, double* data, std::vector<double>& tmp) {
  tmp.assign(std::size_t(nh) * n, 0.0);
  for (int iv = 0; iv < n; ++iv)
    for (int i = 0; i < nh; ++i) {
      double s = 0.0;
      for (int j = 0; j < nh; ++j)
        s += h[i * nh + j] * data[iv * nh + j];
      tmp[iv * nh + i] = s;
    }
  for (int iv = 0; iv < n; ++iv)
    for (int i = 0; i < nh; ++i) {
      double s = 0.0;
      for (int jv = 0; jv < n; ++jv)
        s += z[iv * n + jv] * tmp[jv * nh + i];
      data[iv * nh + i] = s;
    }
}

} // namespace

void MeshGeometry::apply_mass_inverse(int leaf, double* data, int nvar) const {
  thread_local std::vector<double> tmp;
  for (int v = 0; v < nvar; ++v)
    kron_apply(&mass_h_inv_[std::size_t(leaf) * nh_ * nh_], mass_z_inv_.data(), nh_, n_, data + v * nn_, tmp);
}

void MeshGeometry::apply_mass(int leaf, double* data, int nvar) const {
  thread_local std::vector<double> tmp;
  for (int v = 0; v < nvar; ++v)
    kron_apply(&mass_h_[std::size_t(leaf) * nh_ * nh_], mass_z_.data(), nh_, n_, data + v * nn_, tmp);
}

double MeshGeometry::min_diameter() const { return *std::min_element(diameter_.begin(), diameter_.end()); }

double MeshGeometry::volume() const {
  double v = 0.0;
  for (double w : jxw_)
    v += w;
  return v;
}

std::optional<std::pair<int, std::array<double, 3>>> MeshGeometry::locate(const std::array<double, 3>& x) const {
  const ForestMesh& m = *mesh_;
  std::array<double, 3> ref = x;
  ref[dim_ - 1] = mapping_->reference_height(x[0], dim_ == 3 ? x[1] : 0.0, x[dim_ - 1]);
  const int L = m.max_level();
  std::array<std::vector<std::int64_t>, 3> cand;
  for (int a = 0; a < 3; ++a) {
    if (a >= dim_) {
      cand[a] = {0};
      continue;
    }
    const double ext = m.extents()[a];
    const double tol = 1e-12 * ext;
    if (ref[a] < -tol || ref[a] > ext + tol)
      return std::nullopt;
    const std::int64_t ncell = static_cast<std::int64_t>(m.root_counts()[a]) << L;
    const double h = ext / static_cast<double>(ncell);
    const double f = std::clamp(ref[a], 0.0, ext) / h;
    const double rf = std::round(f);
    if (std::abs(f - rf) < 1e-9 && rf > 0 && rf < ncell) {
      cand[a] = {static_cast<std::int64_t>(rf) - 1, static_cast<std::int64_t>(rf)};
    } else {
      cand[a] = {std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(f)), 0, ncell - 1)};
    }
  }
  int best = -1;
  for (auto c0 : cand[0])
    for (auto c1 : cand[1])
      for (auto c2 : cand[2]) {
        const int leaf = m.find_covering_leaf(L, {c0, c1, c2});
        if (leaf >= 0 && (best < 0 || leaf < best))
          best = leaf;
      }
  if (best < 0)
    return std::nullopt;
  const LeafBox box = m.box(best);
  std::array<double, 3> xi{0, 0, 0};
  for (int a = 0; a < dim_; ++a)
    xi[a] = std::clamp((ref[a] - box.lower[a]) / (box.upper[a] - box.lower[a]), 0.0, 1.0);
  return std::make_pair(best, xi);
}

} // namespace ncdg
