#include "ncdg/dg/mortar.hpp"

#include "ncdg/dg/tensor.hpp"

namespace ncdg {

namespace {

const double* axis_matrix(const ReferenceBasis& b, int subface, int t) {
  return subface >= 0 ? b.sub_interp((subface >> t) & 1) : b.interp();
}

} // namespace

void mortar_project(const ReferenceBasis& basis, int dim, int subface, const double* nodal, double* values,
                    double* tmp) {
  const int n = basis.n(), nq = basis.nq();
  if (dim == 2) {
    const int ext[1] = {n};
    contract_axis(axis_matrix(basis, subface, 0), nq, n, nodal, values, ext, 1, 0, false);
  } else {
    int ext[2] = {n, n};
    contract_axis(axis_matrix(basis, subface, 0), nq, n, nodal, tmp, ext, 2, 0, false);
    ext[0] = nq;
    contract_axis(axis_matrix(basis, subface, 1), nq, n, tmp, values, ext, 2, 1, false);
  }
}

void mortar_lift(const ReferenceBasis& basis, int dim, int subface, const double* values, double* nodal,
                 double* tmp) {
  const int n = basis.n(), nq = basis.nq();
  if (dim == 2) {
    const int ext[1] = {nq};
    contract_axis(axis_matrix(basis, subface, 0), nq, n, values, nodal, ext, 1, 0, true);
  } else {
    int ext[2] = {nq, nq};
    contract_axis(axis_matrix(basis, subface, 0), nq, n, values, tmp, ext, 2, 0, true);
    ext[0] = n;
    contract_axis(axis_matrix(basis, subface, 1), nq, n, tmp, nodal, ext, 2, 1, true);
  }
}

} // namespace ncdg
