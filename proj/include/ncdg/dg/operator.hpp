#pragma once

#include "ncdg/common/errors.hpp"
#include "ncdg/common/timer.hpp"
#include "ncdg/common/worker_pool.hpp"
#include "ncdg/dg/field.hpp"
#include "ncdg/dg/tensor.hpp"
#include "ncdg/mesh/geometry.hpp"
#include "ncdg/mesh/partition.hpp"

#include <array>
#include <span>
#include <vector>

namespace ncdg {

enum class BoundaryKind { Wall, FarField };

// Indexed by boundary tag 2*axis + (0 low, 1 high).
struct BoundaryConditions {
  std::array<BoundaryKind, 6> kind{BoundaryKind::Wall, BoundaryKind::Wall, BoundaryKind::Wall,
                                   BoundaryKind::Wall, BoundaryKind::Wall, BoundaryKind::Wall};
};

struct DivergenceOptions {
  bool mass_inverse = true;
  int in_offset = 0;   // first input variable read by the flux
  int out_offset = 0;  // first output variable written
  bool accumulate = false;
  double scale = 1.0;
  // Exterior data for boundary faces, layout [face][fq][boundary_nvar].
  const std::vector<double>* boundary_values = nullptr;
  int boundary_nvar = 0;
  // If set, receives per leaf and output variable the integrated numerical flux
  // through the leaf's boundary faces, layout [leaf][nout].
  std::vector<double>* boundary_flux = nullptr;
};

// Flux providers describe a first-order operator div F(u) pointwise:
//   int nin() const, int nout() const
//   void flux(const double* u, double* F) const                 // F[v * dim + a]
//   void numerical_flux(const double* own, const double* other,
//                       const double* n, double* fn) const       // outward n of `own`
//   void ghost(BoundaryKind, int tag, const double* own, const double* n,
//              const double* exterior, double* ghost) const
//
// The operator returns, per test function, the weak divergence
//   -int F . grad(phi) dV + sum_faces int Fhat . n phi dS,
// optionally multiplied by the inverse mass matrix. It never assembles a
// global matrix. Hanging faces are integrated on the fine sub-faces with the
// coarse trace evaluated there (mortar projection), and the coarse side lifts
// the same numerical flux with the transposed projection.
class DGOperator {
public:
  DGOperator(const MeshGeometry& geo, const Partition& part, WorkerPool& pool, BoundaryConditions bc = {});

  const MeshGeometry& geometry() const { return *geo_; }
  const ForestMesh& mesh() const { return geo_->mesh(); }
  const Partition& partition() const { return *part_; }
  WorkerPool& pool() const { return *pool_; }
  const BoundaryConditions& boundary() const { return bc_; }
  int dim() const { return geo_->dim(); }

  void set_timer(BlockTimer* t) { timer_ = t; }
  BlockTimer* timer() const { return timer_; }

  template <class Flux>
  void weak_divergence(const Field& in, Field& out, const Flux& flux, const DivergenceOptions& opt = {}) const;

  // Traces of every variable of `f` at boundary faces, layout [face][fq][nvar].
  std::vector<double> boundary_traces(const Field& f) const;

  // fn(leaf) for every leaf, split over the workers' owned chunks.
  template <class Fn>
  void for_each_leaf(Fn&& fn) const {
    pool_->run([&](int w) {
      for (int e = part_->first(w); e < part_->last(w); ++e)
        fn(e);
    });
  }

  // Euclidean dot product; per-leaf partial sums are added in leaf order so the
  // result does not depend on the worker count.
  double dot(std::span<const double> a, std::span<const double> b) const;

private:
  void compute_trace(const double* u, int nin, int leaf, const FaceSlot& s, double* dst) const;
  void lift(const double* g, int nout, int leaf, const FaceSlot& s, double* wd) const;

  const MeshGeometry* geo_;
  const Partition* part_;
  WorkerPool* pool_;
  BoundaryConditions bc_;
  BlockTimer* timer_ = nullptr;
  int n_, nq_, nn_, nqv_, nfq_, d_;
  mutable std::vector<double> traces_;  // [face][side][fq][nin]
  mutable std::vector<long> stamps_;    // [face][side]
  mutable long generation_ = 0;
  mutable std::vector<double> partial_;
};

template <class Flux>
void DGOperator::weak_divergence(const Field& in, Field& out, const Flux& flux, const DivergenceOptions& opt) const {
  const std::uint64_t fp = geo_->mesh().fingerprint();
  if (in.mesh_fingerprint() != fp || out.mesh_fingerprint() != fp || in.degree() != geo_->basis().degree())
    throw UsageError("weak_divergence: field does not belong to this mesh");
  const int nin = flux.nin();
  const int nout = flux.nout();
  if (opt.in_offset + nin > in.nvar() || opt.out_offset + nout > out.nvar())
    throw UsageError("weak_divergence: variable range out of bounds");
  const ForestMesh& mesh = geo_->mesh();
  const int nfaces = static_cast<int>(mesh.faces().size());
  const std::size_t side_size = std::size_t(nfq_) * nin;
  if (traces_.size() < std::size_t(nfaces) * 2 * side_size)
    traces_.resize(std::size_t(nfaces) * 2 * side_size);
  if (stamps_.size() != std::size_t(nfaces) * 2)
    stamps_.assign(std::size_t(nfaces) * 2, -1);
  const long gen = ++generation_;
  if (opt.boundary_flux)
    opt.boundary_flux->assign(std::size_t(mesh.num_leaves()) * nout, 0.0);

  // Phase 1: every leaf publishes its traces on its faces.
  {
    ScopedBlock sb(timer_, Block::GhostExchange);
    for_each_leaf([&](int e) {
      const auto slots = mesh.slots(e);
      for (const FaceSlot& s : slots) {
        double* dst = &traces_[(std::size_t(s.face) * 2 + s.side) * side_size];
        compute_trace(in.var(e, opt.in_offset), nin, e, s, dst);
        stamps_[std::size_t(s.face) * 2 + s.side] = gen;
      }
    });
  }

  // Phase 2: volume and face integrals per leaf, reading neighbour traces.
  const int d = d_, n = n_, nq = nq_, nn = nn_, nqv = nqv_, nfq = nfq_;
  const double* I = geo_->basis().interp();
  const double* D = geo_->basis().deriv();
  for_each_leaf([&](int e) {
    thread_local std::vector<double> uq, Fq, G, wd, tmp, tmp2, ui, fpt, ghost, fnum, gface;
    Fq.resize(std::size_t(nout) * d * nqv);
    G.resize(std::size_t(nout) * d * nqv);
    wd.assign(std::size_t(nout) * nn, 0.0);
    tmp.resize(nqv);
    tmp2.resize(nqv);
    ui.resize(nin);
    fpt.resize(std::size_t(nout) * d);
    ghost.resize(nin);
    fnum.resize(nout);
    gface.resize(std::size_t(nout) * nfq);

    // Fluxes evaluated pointwise at the quadrature points; interpolating nodal
    // fluxes instead aliases the variable-coefficient terms of a stratified state.
    const double* u0 = in.var(e, opt.in_offset);
    uq.resize(std::size_t(nin) * nqv);
    for (int j = 0; j < nin; ++j)
      interpolate_tensor(I, u0 + std::size_t(j) * nn, &uq[std::size_t(j) * nqv], tmp.data(), nq, n, d);
    const double* u = uq.data();
    for (int i = 0; i < nqv; ++i) {
      for (int j = 0; j < nin; ++j)
        ui[j] = u[j * nqv + i];
      flux.flux(ui.data(), fpt.data());
      for (int v = 0; v < nout; ++v)
        for (int a = 0; a < d; ++a)
          Fq[(std::size_t(v) * d + a) * nqv + i] = fpt[v * d + a];
    }
    const auto met = geo_->metric(e);
    for (int v = 0; v < nout; ++v)
      for (int q = 0; q < nqv; ++q)
        for (int a = 0; a < d; ++a) {
          double s = 0.0;
          for (int b = 0; b < d; ++b)
            s += met[(q * d + a) * d + b] * Fq[(std::size_t(v) * d + b) * nqv + q];
          G[(std::size_t(v) * d + a) * nqv + q] = s;
        }
    // -int F . grad(phi): test-function derivative along axis a, values along the others.
    for (int v = 0; v < nout; ++v)
      for (int a = 0; a < d; ++a) {
        const double* mats[3] = {I, I, I};
        mats[a] = D;
        apply_tensor(mats, &G[(std::size_t(v) * d + a) * nqv], tmp2.data(), tmp.data(), nq, n, d, true);
        for (int i = 0; i < nn; ++i)
          wd[std::size_t(v) * nn + i] -= tmp2[i];
      }

    // Face integrals.
    const auto slots = mesh.slots(e);
    const int off = mesh.slot_offset(e);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      const FaceSlot& s = slots[k];
      const Face& face = mesh.faces()[s.face];
      const double* own = &traces_[(std::size_t(s.face) * 2 + s.side) * side_size];
      const double* other = nullptr;
      const bool boundary = face.kind == FaceKind::Boundary;
      if (!boundary) {
        const std::size_t os = std::size_t(s.face) * 2 + (1 - s.side);
        if (stamps_[os] != gen)
          throw ConsistencyError("weak_divergence: missing neighbour trace on face " + std::to_string(s.face));
        other = &traces_[os * side_size];
      }
      const auto normals = geo_->normals(off + static_cast<int>(k));
      const auto fjxw = geo_->face_jxw(off + static_cast<int>(k));
      for (int f = 0; f < nfq; ++f) {
        const double* uo = own + std::size_t(f) * nin;
        const double* ux;
        if (boundary) {
          const double* ext = opt.boundary_values
                                  ? &(*opt.boundary_values)[(std::size_t(s.face) * nfq + f) * opt.boundary_nvar]
                                  : nullptr;
          flux.ghost(bc_.kind[face.boundary_tag], face.boundary_tag, uo, &normals[f * d], ext, ghost.data());
          ux = ghost.data();
        } else {
          ux = other + std::size_t(f) * nin;
        }
        flux.numerical_flux(uo, ux, &normals[f * d], fnum.data());
        for (int v = 0; v < nout; ++v)
          gface[std::size_t(v) * nfq + f] = fnum[v] * fjxw[f];
      }
      if (boundary && opt.boundary_flux)
        for (int v = 0; v < nout; ++v) {
          double sum = 0.0;
          for (int f = 0; f < nfq; ++f)
            sum += gface[std::size_t(v) * nfq + f];
          (*opt.boundary_flux)[std::size_t(e) * nout + v] += sum;
        }
      lift(gface.data(), nout, e, s, wd.data());
    }
    if (opt.mass_inverse)
      geo_->apply_mass_inverse(e, wd.data(), nout);
    double* o = out.var(e, opt.out_offset);
    if (opt.accumulate)
      for (std::size_t i = 0; i < wd.size(); ++i)
        o[i] += opt.scale * wd[i];
    else
      for (std::size_t i = 0; i < wd.size(); ++i)
        o[i] = opt.scale * wd[i];
  });
}

} // namespace ncdg
