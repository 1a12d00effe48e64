#pragma once

#include <cmath>

#include "synthpipe/core/mat.hpp"

namespace synthpipe::nn {

template <typename T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

/// log(1 + exp(x)) without overflow.
template <typename T>
T softplus(T x) {
  if (x > T(0)) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

/// Mean binary cross-entropy on logits; writes d(mean loss)/d(logit).
/// loss_i = softplus(l_i) - y_i * l_i, grad_i = (sigmoid(l_i) - y_i) / n.
template <typename T>
T bce_with_logits(const Vec<T>& logits, const Vec<T>& targets, Vec<T>& dlogits) {
  const Eigen::Index n = logits.size();
  dlogits.resize(n);
  T loss = T(0);
  const T inv_n = T(1) / static_cast<T>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    loss += softplus(logits(i)) - targets(i) * logits(i);
    dlogits(i) = (sigmoid(logits(i)) - targets(i)) * inv_n;
  }
  return loss * inv_n;
}

}  // namespace synthpipe::nn
