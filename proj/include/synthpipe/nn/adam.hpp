#pragma once

#include <cmath>
#include <vector>

#include "synthpipe/nn/layers.hpp"

namespace synthpipe::nn {

/// Adaptive-moment gradient descent. Slots are bound to a fixed parameter
/// list; step() consumes the accumulated gradients in place.
template <typename T>
class Adam {
 public:
  Adam(std::vector<ParamView<T>> params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : params_) {
      m_.emplace_back(Vec<T>::Zero(p.size));
      v_.emplace_back(Vec<T>::Zero(p.size));
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& p = params_[k];
      for (Eigen::Index i = 0; i < p.size; ++i) {
        const double g = static_cast<double>(p.grad[i]);
        double m = beta1_ * static_cast<double>(m_[k](i)) + (1.0 - beta1_) * g;
        double v = beta2_ * static_cast<double>(v_[k](i)) + (1.0 - beta2_) * g * g;
        m_[k](i) = static_cast<T>(m);
        v_[k](i) = static_cast<T>(v);
        p.value[i] -= static_cast<T>(lr_ * (m / bc1) / (std::sqrt(v / bc2) + eps_));
      }
    }
  }

  double learning_rate() const { return lr_; }

 private:
  std::vector<ParamView<T>> params_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Vec<T>> m_, v_;
};

}  // namespace synthpipe::nn
