#include "ncdg/dg/operator.hpp"

#include "ncdg/dg/mortar.hpp"

namespace ncdg {

namespace {

int ipow(int b, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i)
    r *= b;
  return r;
}

// Volume node index of face node (j0, j1) on face `direction`.
int face_node(int direction, int j0, int j1, int n, int dim) {
  const int axis = direction / 2;
  const int fixed = (direction % 2) ? n - 1 : 0;
  int idx[3] = {0, 0, 0};
  int t = 0;
  const int js[2] = {j0, j1};
  for (int a = 0; a < dim; ++a)
    idx[a] = (a == axis) ? fixed : js[t++];
  return idx[0] + n * (idx[1] + n * idx[2]);
}

} // namespace

DGOperator::DGOperator(const MeshGeometry& geo, const Partition& part, WorkerPool& pool, BoundaryConditions bc)
    : geo_(&geo), part_(&part), pool_(&pool), bc_(bc) {
  if (part.workers != pool.size())
    throw UsageError("partition and worker pool sizes differ");
  if (static_cast<int>(part.owner.size()) != geo.mesh().num_leaves())
    throw UsageError("partition does not match the mesh");
  d_ = geo.dim();
  n_ = geo.basis().n();
  nq_ = geo.basis().nq();
  nn_ = ipow(n_, d_);
  nqv_ = ipow(nq_, d_);
  nfq_ = ipow(nq_, d_ - 1);
}

void DGOperator::compute_trace(const double* u, int nin, int leaf, const FaceSlot& s, double* dst) const {
  (void)leaf;
  const int n = n_, nn = nn_, nfq = nfq_;
  thread_local std::vector<double> nodal, tmp, q;
  nodal.resize(ipow(n, d_ - 1));
  tmp.resize(nfq);
  q.resize(nfq);
  const int n1 = d_ == 3 ? n : 1;
  for (int v = 0; v < nin; ++v) {
    for (int j1 = 0; j1 < n1; ++j1)
      for (int j0 = 0; j0 < n; ++j0)
        nodal[j0 + n * j1] = u[v * nn + face_node(s.direction, j0, j1, n, d_)];
    mortar_project(geo_->basis(), d_, s.subface, nodal.data(), q.data(), tmp.data());
    for (int f = 0; f < nfq; ++f)
      dst[std::size_t(f) * nin + v] = q[f];
  }
}

void DGOperator::lift(const double* g, int nout, int leaf, const FaceSlot& s, double* wd) const {
  (void)leaf;
  const int n = n_, nn = nn_, nfq = nfq_;
  thread_local std::vector<double> tmp, c;
  tmp.resize(nfq);
  c.resize(ipow(n, d_ - 1));
  const int n1 = d_ == 3 ? n : 1;
  for (int v = 0; v < nout; ++v) {
    mortar_lift(geo_->basis(), d_, s.subface, g + std::size_t(v) * nfq, c.data(), tmp.data());
    for (int j1 = 0; j1 < n1; ++j1)
      for (int j0 = 0; j0 < n; ++j0)
        wd[std::size_t(v) * nn + face_node(s.direction, j0, j1, n, d_)] += c[j0 + n * j1];
  }
}

std::vector<double> DGOperator::boundary_traces(const Field& f) const {
  if (f.mesh_fingerprint() != geo_->mesh().fingerprint())
    throw UsageError("boundary_traces: field lives on a different mesh");
  const ForestMesh& mesh = geo_->mesh();
  const int nv = f.nvar();
  std::vector<double> out(mesh.faces().size() * std::size_t(nfq_) * nv, 0.0);
  for (int e = 0; e < mesh.num_leaves(); ++e)
    for (const FaceSlot& s : mesh.slots(e)) {
      if (mesh.faces()[s.face].kind != FaceKind::Boundary)
        continue;
      compute_trace(f.leaf(e), nv, e, s, &out[std::size_t(s.face) * nfq_ * nv]);
    }
  return out;
}

double DGOperator::dot(std::span<const double> a, std::span<const double> b) const {
  if (a.size() != b.size())
    throw UsageError("dot: size mismatch");
  const int nl = geo_->mesh().num_leaves();
  const std::size_t per = nl > 0 ? a.size() / nl : 0;
  if (per * nl != a.size())
    throw UsageError("dot: vector is not a per-leaf field");
  partial_.resize(nl);
  for_each_leaf([&](int e) {
    double s = 0.0;
    const std::size_t o = per * e;
    for (std::size_t i = 0; i < per; ++i)
      s += a[o + i] * b[o + i];
    partial_[e] = s;
  });
  double total = 0.0;
  for (double p : partial_)
    total += p;
  return total;
}

} // namespace ncdg
