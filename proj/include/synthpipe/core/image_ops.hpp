#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "synthpipe/core/errors.hpp"
#include "synthpipe/core/mat.hpp"

namespace synthpipe {

struct PixelRect {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;
};

/// Fixed crop window plus mask rectangles (mask coordinates are relative to
/// the crop). Masked pixels are filled with the crop minimum before any
/// statistics are taken.
struct CropSpec {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;
  std::vector<PixelRect> mask_regions;

  static CropSpec identity(int height, int width) {
    return CropSpec{0, 0, height, width, {}};
  }
};

enum class NormMode { zscore, unit_range };

template <typename Derived>
Mat<typename Derived::Scalar> crop_and_mask(const Eigen::MatrixBase<Derived>& raw,
                                            const CropSpec& spec) {
  using T = typename Derived::Scalar;
  if (spec.height <= 0 || spec.width <= 0 || spec.top < 0 || spec.left < 0 ||
      spec.top + spec.height > raw.rows() || spec.left + spec.width > raw.cols()) {
    throw ShapeError("crop rectangle does not fit inside the source frame");
  }
  Mat<T> out = raw.block(spec.top, spec.left, spec.height, spec.width);
  if (!spec.mask_regions.empty()) {
    const T fill = out.minCoeff();
    for (const PixelRect& m : spec.mask_regions) {
      if (m.top < 0 || m.left < 0 || m.height <= 0 || m.width <= 0 ||
          m.top + m.height > spec.height || m.left + m.width > spec.width) {
        throw ShapeError("mask region does not fit inside the crop");
      }
      out.block(m.top, m.left, m.height, m.width).setConstant(fill);
    }
  }
  return out;
}

/// Bilinear resampling with half-pixel centers and edge clamping.
template <typename Derived>
Mat<typename Derived::Scalar> resize_bilinear(const Eigen::MatrixBase<Derived>& src,
                                              int out_h, int out_w) {
  using T = typename Derived::Scalar;
  const int in_h = static_cast<int>(src.rows());
  const int in_w = static_cast<int>(src.cols());
  if (in_h <= 0 || in_w <= 0 || out_h <= 0 || out_w <= 0) {
    throw ShapeError("resize_bilinear: empty input or output");
  }
  Mat<T> img = src;  // materialize the expression once
  Mat<T> out(out_h, out_w);
  const double sy = static_cast<double>(in_h) / out_h;
  const double sx = static_cast<double>(in_w) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y0c = std::clamp(y0, 0, in_h - 1);
    int y1c = std::clamp(y0 + 1, 0, in_h - 1);
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x0c = std::clamp(x0, 0, in_w - 1);
      int x1c = std::clamp(x0 + 1, 0, in_w - 1);
      double v = (1.0 - wy) * ((1.0 - wx) * img(y0c, x0c) + wx * img(y0c, x1c)) +
                 wy * ((1.0 - wx) * img(y1c, x0c) + wx * img(y1c, x1c));
      out(y, x) = static_cast<T>(v);
    }
  }
  return out;
}

/// Linear-interpolated percentile, p in [0, 100].
template <typename T>
T percentile(std::vector<T> values, double p) {
  if (values.empty()) throw ShapeError("percentile of empty set");
  std::sort(values.begin(), values.end());
  double q = (static_cast<double>(values.size()) - 1.0) * p / 100.0;
  auto lo = static_cast<std::size_t>(std::floor(q));
  auto hi = std::min(lo + 1, values.size() - 1);
  double frac = q - static_cast<double>(lo);
  return static_cast<T>((1.0 - frac) * values[lo] + frac * values[hi]);
}

/// Z-score: subtract the per-frame mean, divide by the per-frame std.
template <typename T>
void normalize_zscore(Mat<T>& img) {
  const double n = static_cast<double>(img.size());
  const double mean = img.template cast<double>().sum() / n;
  const double var =
      (img.template cast<double>().array() - mean).square().sum() / n;
  const double sd = std::sqrt(var);
  if (sd < 1e-8) throw DegenerateFrameError("constant frame in z-score mode");
  img = ((img.template cast<double>().array() - mean) / sd)
            .template cast<T>()
            .matrix();
}

/// Affine map of the 1st-99th percentile range onto [-1, 1], clipped.
template <typename T>
void normalize_unit_range(Mat<T>& img) {
  std::vector<T> vals(img.data(), img.data() + img.size());
  const double p1 = percentile(vals, 1.0);
  const double p99 = percentile(vals, 99.0);
  if (p99 - p1 < 1e-12) {
    img.setZero();
    return;
  }
  const double scale = 2.0 / (p99 - p1);
  img = (((img.template cast<double>().array() - p1) * scale - 1.0)
             .cwiseMax(-1.0)
             .cwiseMin(1.0))
            .template cast<T>()
            .matrix();
}

template <typename T>
Mat<T> hflip(const Mat<T>& img) {
  return img.rowwise().reverse();
}

/// Gamma exponent applied on the frame's own [min, max] range mapped to
/// [0, 1] and back; identity when the frame is constant.
template <typename T>
Mat<T> gamma_adjust(const Mat<T>& img, double gamma) {
  const double lo = img.minCoeff();
  const double hi = img.maxCoeff();
  if (hi - lo < 1e-12) return img;
  Mat<T> out(img.rows(), img.cols());
  const double inv = 1.0 / (hi - lo);
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    double u = (static_cast<double>(img.data()[i]) - lo) * inv;
    out.data()[i] = static_cast<T>(lo + (hi - lo) * std::pow(u, gamma));
  }
  return out;
}

/// Separable Gaussian blur with clamp-to-edge padding; sigma <= 0 is identity.
template <typename T>
Mat<T> gaussian_blur(const Mat<T>& img, double sigma) {
  if (sigma <= 1e-6) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;

  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  Mat<T> tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int xx = std::clamp(x + i, 0, w - 1);
        acc += k[static_cast<std::size_t>(i + radius)] * img(y, xx);
      }
      tmp(y, x) = static_cast<T>(acc);
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int yy = std::clamp(y + i, 0, h - 1);
        acc += k[static_cast<std::size_t>(i + radius)] * tmp(yy, x);
      }
      out(y, x) = static_cast<T>(acc);
    }
  }
  return out;
}

/// Crop -> mask -> bilinear resize -> normalize. The square target side
/// defaults to 256 elsewhere; callers pass smaller sides for reduced runs.
template <typename T>
Mat<T> preprocess_pixels(const Mat<T>& raw, const CropSpec& spec, NormMode mode,
                         int target_side) {
  Mat<T> img = crop_and_mask(raw, spec);
  img = resize_bilinear(img, target_side, target_side);
  if (mode == NormMode::zscore) {
    normalize_zscore(img);
  } else {
    normalize_unit_range(img);
  }
  return img;
}

}  // namespace synthpipe
