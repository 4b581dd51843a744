#pragma once

// Sum-factorisation helpers on tensors stored with axis 0 fastest. Matrices are
// row-major `rows x cols`; applied directly they map an axis of length `cols`
// to length `rows`, transposed they map `rows` back to `cols`.

namespace ncdg {

// `ext` holds the input extents; the output differs only along `axis`.
// `in` and `out` must not alias.
inline void contract_axis(const double* M, int rows, int cols, const double* in, double* out, const int* ext,
                          int dim, int axis, bool transpose) {
  const int kin = transpose ? rows : cols;
  const int kout = transpose ? cols : rows;
  int stride = 1;
  for (int a = 0; a < axis; ++a)
    stride *= ext[a];
  int outer = 1;
  for (int a = axis + 1; a < dim && a < 3; ++a)
    outer *= ext[a];
  for (int hi = 0; hi < outer; ++hi)
    for (int lo = 0; lo < stride; ++lo) {
      const double* src = in + lo + hi * stride * kin;
      double* dst = out + lo + hi * stride * kout;
      for (int q = 0; q < kout; ++q) {
        double s = 0.0;
        if (transpose)
          for (int i = 0; i < kin; ++i)
            s += M[i * cols + q] * src[i * stride];
        else
          for (int i = 0; i < kin; ++i)
            s += M[q * cols + i] * src[i * stride];
        dst[q * stride] = s;
      }
    }
}

// Square n x n form on an n^dim tensor.
inline void contract_axis(const double* M, const double* in, double* out, int n, int dim, int axis, bool transpose) {
  const int ext[3] = {n, n, n};
  contract_axis(M, n, n, in, out, ext, dim, axis, transpose);
}

// Per-axis matrices mats[a] (nq x n). Directly applied: n^dim -> nq^dim;
// transposed: nq^dim -> n^dim. `out` and `tmp` need max(n, nq)^dim entries.
inline void apply_tensor(const double* const* mats, const double* in, double* out, double* tmp, int nq, int n,
                         int dim, bool transpose) {
  const int from = transpose ? nq : n;
  const int to = transpose ? n : nq;
  int ext[3] = {from, from, from};
  auto step = [&](int a, const double* src, double* dst) {
    contract_axis(mats[a], nq, n, src, dst, ext, dim, a, transpose);
    ext[a] = to;
  };
  if (dim == 1) {
    step(0, in, out);
  } else if (dim == 2) {
    step(0, in, tmp);
    step(1, tmp, out);
  } else {
    step(0, in, out);
    step(1, out, tmp);
    step(2, tmp, out);
  }
}

inline void apply_tensor(const double* const* mats, const double* in, double* out, double* tmp, int n, int dim,
                         bool transpose) {
  apply_tensor(mats, in, out, tmp, n, n, dim, transpose);
}

// out = (M x M x M) in with M nq x n.
inline void interpolate_tensor(const double* M, const double* in, double* out, double* tmp, int nq, int n, int dim) {
  const double* mats[3] = {M, M, M};
  apply_tensor(mats, in, out, tmp, nq, n, dim, false);
}

inline void interpolate_tensor(const double* M, const double* in, double* out, double* tmp, int n, int dim) {
  interpolate_tensor(M, in, out, tmp, n, n, dim);
}

} // namespace ncdg
