#pragma once

#include "ncdg/dg/basis.hpp"

namespace ncdg {

// Face traces live on the (dim-1)-dimensional tensor grid of a leaf face,
// first tangential axis fastest. `subface` < 0 addresses the whole face;
// otherwise bit b selects the lower (0) or upper (1) half along tangential axis b.

// Nodal face trace -> values at the Gauss points of the face or sub-face.
// `tmp` needs nq^(dim-1) entries.
void mortar_project(const ReferenceBasis& basis, int dim, int subface, const double* nodal, double* values,
                    double* tmp);

// Transpose of mortar_project; overwrites `nodal`.
void mortar_lift(const ReferenceBasis& basis, int dim, int subface, const double* values, double* nodal,
                 double* tmp);

} // namespace ncdg
