#pragma once

#include <Eigen/Core>

#include "synthpipe/core/errors.hpp"
#include "synthpipe/core/mat.hpp"

namespace synthpipe {

/// Dense NCHW batch tensor backed by one contiguous buffer. Samples are
/// viewed as (channels x pixels) row-major matrix maps so convolutions
/// reduce to Eigen GEMM after im2col.
template <typename T>
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  Eigen::Array<T, Eigen::Dynamic, 1> data;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_) : n(n_), c(c_), h(h_), w(w_) {
    data.setZero(static_cast<Eigen::Index>(n) * c * h * w);
  }

  Eigen::Index size() const { return data.size(); }
  Eigen::Index sample_size() const { return static_cast<Eigen::Index>(c) * h * w; }

  T* sample(int i) { return data.data() + sample_size() * i; }
  const T* sample(int i) const { return data.data() + sample_size() * i; }

  using MatMap = Eigen::Map<Mat<T>>;
  using ConstMatMap = Eigen::Map<const Mat<T>>;

  /// Sample i as a (c x h*w) matrix.
  MatMap channels(int i) { return MatMap(sample(i), c, static_cast<Eigen::Index>(h) * w); }
  ConstMatMap channels(int i) const {
    return ConstMatMap(sample(i), c, static_cast<Eigen::Index>(h) * w);
  }

  /// Whole batch as an (n x c*h*w) matrix.
  MatMap rows() { return MatMap(data.data(), n, sample_size()); }
  ConstMatMap rows() const { return ConstMatMap(data.data(), n, sample_size()); }

  /// Single-channel sample as an (h x w) image.
  MatMap image(int i, int ch = 0) {
    return MatMap(sample(i) + static_cast<Eigen::Index>(ch) * h * w, h, w);
  }
  ConstMatMap image(int i, int ch = 0) const {
    return ConstMatMap(sample(i) + static_cast<Eigen::Index>(ch) * h * w, h, w);
  }

  bool same_shape(const Tensor4& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
};

inline int conv_out_side(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

inline int conv_transpose_out_side(int in, int kernel, int stride, int pad) {
  return stride * (in - 1) + kernel - 2 * pad;
}

/// Unfold one (C, H, W) sample into a (C*k*k, Ho*Wo) patch matrix with
/// zero padding. Row index is (c*k + ky)*k + kx, column index oy*Wo + ox.
template <typename T>
void im2col(const T* src, int c, int h, int w, int kernel, int stride, int pad,
            Mat<T>& cols) {
  const int ho = conv_out_side(h, kernel, stride, pad);
  const int wo = conv_out_side(w, kernel, stride, pad);
  cols.resize(static_cast<Eigen::Index>(c) * kernel * kernel,
              static_cast<Eigen::Index>(ho) * wo);
  for (int ch = 0; ch < c; ++ch) {
    const T* plane = src + static_cast<Eigen::Index>(ch) * h * w;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const Eigen::Index row =
            (static_cast<Eigen::Index>(ch) * kernel + ky) * kernel + kx;
        T* dst = cols.data() + row * cols.cols();
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) {
            for (int ox = 0; ox < wo; ++ox) dst[oy * wo + ox] = T(0);
            continue;
          }
          const T* srow = plane + static_cast<Eigen::Index>(iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst[oy * wo + ox] = (ix < 0 || ix >= w) ? T(0) : srow[ix];
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: scatter-add a (C*k*k, Ho*Wo) patch matrix back into a
/// (C, H, W) sample buffer (which must be pre-zeroed by the caller).
template <typename T>
void col2im(const Mat<T>& cols, int c, int h, int w, int kernel, int stride,
            int pad, T* dst) {
  const int ho = conv_out_side(h, kernel, stride, pad);
  const int wo = conv_out_side(w, kernel, stride, pad);
  if (cols.rows() != static_cast<Eigen::Index>(c) * kernel * kernel ||
      cols.cols() != static_cast<Eigen::Index>(ho) * wo) {
    throw ShapeError("col2im: patch matrix shape mismatch");
  }
  for (int ch = 0; ch < c; ++ch) {
    T* plane = dst + static_cast<Eigen::Index>(ch) * h * w;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const Eigen::Index row =
            (static_cast<Eigen::Index>(ch) * kernel + ky) * kernel + kx;
        const T* srow = cols.data() + row * cols.cols();
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          T* drow = plane + static_cast<Eigen::Index>(iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) drow[ix] += srow[oy * wo + ox];
          }
        }
      }
    }
  }
}

}  // namespace synthpipe
