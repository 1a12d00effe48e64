#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "synthpipe/core/errors.hpp"
#include "synthpipe/core/mat.hpp"
#include "synthpipe/core/rng.hpp"
#include "synthpipe/core/tensor.hpp"

namespace synthpipe::nn {

enum class Phase { train, eval };

enum class Init { dcgan, he };

/// Mutable view of one parameter tensor and its gradient buffer.
template <typename T>
struct ParamView {
  std::string name;
  T* value = nullptr;
  T* grad = nullptr;
  Eigen::Index size = 0;
  std::vector<int> shape;
};

/// Non-trainable state (batch-norm running statistics) serialized with
/// checkpoints but never touched by the optimizer.
template <typename T>
struct StateView {
  std::string name;
  T* value = nullptr;
  Eigen::Index size = 0;
  std::vector<int> shape;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor4<T> forward(const Tensor4<T>& x, Phase phase, Rng& rng) = 0;
  virtual Tensor4<T> backward(const Tensor4<T>& dy) = 0;
  virtual void collect_params(const std::string& prefix, std::vector<ParamView<T>>& out) {
    (void)prefix;
    (void)out;
  }
  virtual void collect_state(const std::string& prefix, std::vector<StateView<T>>& out) {
    (void)prefix;
    (void)out;
  }
  virtual const char* kind() const = 0;
};

namespace detail {

template <typename T>
void init_weights(Mat<T>& w, Init init, Eigen::Index fan_in, Rng& rng) {
  const double std =
      init == Init::dcgan ? 0.02 : std::sqrt(2.0 / static_cast<double>(fan_in));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w.data()[i] = static_cast<T>(rng.normal() * std);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Convolution. Weight is stored as a (C_out, C_in*k*k) matrix so forward is
// one GEMM against the im2col patch matrix per sample.
// ---------------------------------------------------------------------------
template <typename T>
class Conv2d : public Layer<T> {
 public:
  Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, Init init, Rng& rng)
      : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad) {
    weight_.resize(out_ch, static_cast<Eigen::Index>(in_ch) * kernel * kernel);
    detail::init_weights(weight_, init, weight_.cols(), rng);
    bias_ = Vec<T>::Zero(out_ch);
    dweight_ = Mat<T>::Zero(weight_.rows(), weight_.cols());
    dbias_ = Vec<T>::Zero(out_ch);
  }

  Tensor4<T> forward(const Tensor4<T>& x, Phase, Rng&) override {
    if (x.c != in_ch_) throw ShapeError("Conv2d: channel mismatch");
    x_ = x;
    const int ho = conv_out_side(x.h, kernel_, stride_, pad_);
    const int wo = conv_out_side(x.w, kernel_, stride_, pad_);
    if (ho <= 0 || wo <= 0) throw ShapeError("Conv2d: output would be empty");
    Tensor4<T> y(x.n, out_ch_, ho, wo);
    Mat<T> cols;
    for (int i = 0; i < x.n; ++i) {
      im2col(x.sample(i), x.c, x.h, x.w, kernel_, stride_, pad_, cols);
      y.channels(i).noalias() = weight_ * cols;
      y.channels(i).colwise() += bias_;
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx(x_.n, x_.c, x_.h, x_.w);
    Mat<T> cols, dcols;
    for (int i = 0; i < x_.n; ++i) {
      im2col(x_.sample(i), x_.c, x_.h, x_.w, kernel_, stride_, pad_, cols);
      dweight_.noalias() += dy.channels(i) * cols.transpose();
      dbias_ += dy.channels(i).rowwise().sum();
      dcols.noalias() = weight_.transpose() * dy.channels(i);
      col2im(dcols, x_.c, x_.h, x_.w, kernel_, stride_, pad_, dx.sample(i));
    }
    return dx;
  }

  void collect_params(const std::string& prefix, std::vector<ParamView<T>>& out) override {
    out.push_back({prefix + ".weight", weight_.data(), dweight_.data(), weight_.size(),
                   {out_ch_, in_ch_, kernel_, kernel_}});
    out.push_back({prefix + ".bias", bias_.data(), dbias_.data(), bias_.size(), {out_ch_}});
  }

  const char* kind() const override { return "conv"; }

 private:
  int in_ch_, out_ch_, kernel_, stride_, pad_;
  Mat<T> weight_, dweight_;
  Vec<T> bias_, dbias_;
  Tensor4<T> x_;
};

// ---------------------------------------------------------------------------
// Transposed convolution (fractionally strided). Implemented as the adjoint
// of Conv2d with weight (C_in, C_out*k*k): forward scatters patch columns
// with col2im, backward-data is a plain im2col GEMM.
// ---------------------------------------------------------------------------
template <typename T>
class ConvTranspose2d : public Layer<T> {
 public:
  ConvTranspose2d(int in_ch, int out_ch, int kernel, int stride, int pad, Init init, Rng& rng)
      : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad) {
    weight_.resize(in_ch, static_cast<Eigen::Index>(out_ch) * kernel * kernel);
    detail::init_weights(weight_, init, static_cast<Eigen::Index>(in_ch) * kernel * kernel, rng);
    bias_ = Vec<T>::Zero(out_ch);
    dweight_ = Mat<T>::Zero(weight_.rows(), weight_.cols());
    dbias_ = Vec<T>::Zero(out_ch);
  }

  Tensor4<T> forward(const Tensor4<T>& x, Phase, Rng&) override {
    if (x.c != in_ch_) throw ShapeError("ConvTranspose2d: channel mismatch");
    x_ = x;
    const int ho = conv_transpose_out_side(x.h, kernel_, stride_, pad_);
    const int wo = conv_transpose_out_side(x.w, kernel_, stride_, pad_);
    if (ho <= 0 || wo <= 0) throw ShapeError("ConvTranspose2d: output would be empty");
    Tensor4<T> y(x.n, out_ch_, ho, wo);
    Mat<T> cols;
    for (int i = 0; i < x.n; ++i) {
      cols.noalias() = weight_.transpose() * x.channels(i);
      col2im(cols, out_ch_, ho, wo, kernel_, stride_, pad_, y.sample(i));
      y.channels(i).colwise() += bias_;
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) override {
    const int ho = dy.h;
    const int wo = dy.w;
    Tensor4<T> dx(x_.n, x_.c, x_.h, x_.w);
    Mat<T> dcols;
    for (int i = 0; i < x_.n; ++i) {
      im2col(dy.sample(i), out_ch_, ho, wo, kernel_, stride_, pad_, dcols);
      dx.channels(i).noalias() = weight_ * dcols;
      dweight_.noalias() += x_.channels(i) * dcols.transpose();
      dbias_ += dy.channels(i).rowwise().sum();
    }
    return dx;
  }

  void collect_params(const std::string& prefix, std::vector<ParamView<T>>& out) override {
    out.push_back({prefix + ".weight", weight_.data(), dweight_.data(), weight_.size(),
                   {in_ch_, out_ch_, kernel_, kernel_}});
    out.push_back({prefix + ".bias", bias_.data(), dbias_.data(), bias_.size(), {out_ch_}});
  }

  const char* kind() const override { return "convt"; }

 private:
  int in_ch_, out_ch_, kernel_, stride_, pad_;
  Mat<T> weight_, dweight_;
  Vec<T> bias_, dbias_;
  Tensor4<T> x_;
};

// ---------------------------------------------------------------------------
// Per-channel batch normalization over (N, H, W). Biased variance is used
// for normalization; running statistics keep the unbiased correction and
// feed eval-phase forwards.
// ---------------------------------------------------------------------------
template <typename T>
class BatchNorm2d : public Layer<T> {
 public:
  explicit BatchNorm2d(int channels, double momentum = 0.1, double eps = 1e-5)
      : c_(channels), momentum_(momentum), eps_(eps) {
    gamma_ = Vec<T>::Ones(channels);
    beta_ = Vec<T>::Zero(channels);
    dgamma_ = Vec<T>::Zero(channels);
    dbeta_ = Vec<T>::Zero(channels);
    running_mean_ = Vec<T>::Zero(channels);
    running_var_ = Vec<T>::Ones(channels);
  }

  Tensor4<T> forward(const Tensor4<T>& x, Phase phase, Rng&) override {
    if (x.c != c_) throw ShapeError("BatchNorm2d: channel mismatch");
    const Eigen::Index m = static_cast<Eigen::Index>(x.n) * x.h * x.w;
    Tensor4<T> y(x.n, x.c, x.h, x.w);
    if (phase == Phase::train) {
      x_ = x;
      mean_.resize(c_);
      var_.resize(c_);
      for (int ch = 0; ch < c_; ++ch) {
        T acc = 0;
        for (int i = 0; i < x.n; ++i) acc += x.channels(i).row(ch).sum();
        mean_(ch) = acc / static_cast<T>(m);
        T vacc = 0;
        for (int i = 0; i < x.n; ++i) {
          vacc += (x.channels(i).row(ch).array() - mean_(ch)).square().sum();
        }
        var_(ch) = vacc / static_cast<T>(m);
      }
      inv_std_ = (var_.array() + static_cast<T>(eps_)).sqrt().inverse();
      xhat_ = Tensor4<T>(x.n, x.c, x.h, x.w);
      for (int i = 0; i < x.n; ++i) {
        xhat_.channels(i) =
            ((x.channels(i).colwise() - mean_).array().colwise() * inv_std_.array()).matrix();
        y.channels(i) =
            ((xhat_.channels(i).array().colwise() * gamma_.array()).colwise() + beta_.array())
                .matrix();
      }
      const T unbias = m > 1 ? static_cast<T>(m) / static_cast<T>(m - 1) : T(1);
      running_mean_ = (T(1) - static_cast<T>(momentum_)) * running_mean_ +
                      static_cast<T>(momentum_) * mean_;
      running_var_ = (T(1) - static_cast<T>(momentum_)) * running_var_ +
                     static_cast<T>(momentum_) * (var_ * unbias);
    } else {
      Vec<T> inv = (running_var_.array() + static_cast<T>(eps_)).sqrt().inverse();
      for (int i = 0; i < x.n; ++i) {
        y.channels(i) = ((((x.channels(i).colwise() - running_mean_).array().colwise() *
                           inv.array())
                              .colwise() *
                          gamma_.array())
                             .colwise() +
                         beta_.array())
                            .matrix();
      }
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) override {
    const Eigen::Index m = static_cast<Eigen::Index>(dy.n) * dy.h * dy.w;
    Tensor4<T> dx(dy.n, dy.c, dy.h, dy.w);
    Vec<T> sum_dy = Vec<T>::Zero(c_);
    Vec<T> sum_dy_xhat = Vec<T>::Zero(c_);
    for (int i = 0; i < dy.n; ++i) {
      sum_dy += dy.channels(i).rowwise().sum();
      sum_dy_xhat += (dy.channels(i).array() * xhat_.channels(i).array()).rowwise().sum().matrix();
    }
    dgamma_ += sum_dy_xhat;
    dbeta_ += sum_dy;
    // dx = gamma/std * (dy - mean(dy) - xhat * mean(dy*xhat))
    const T inv_m = T(1) / static_cast<T>(m);
    for (int i = 0; i < dy.n; ++i) {
      dx.channels(i) =
          ((dy.channels(i).array() -
            (sum_dy * inv_m).replicate(1, dy.channels(i).cols()).array() -
            xhat_.channels(i).array() *
                (sum_dy_xhat * inv_m).replicate(1, dy.channels(i).cols()).array())
               .colwise() *
           (gamma_.array() * inv_std_.array()))
              .matrix();
    }
    return dx;
  }

  void collect_params(const std::string& prefix, std::vector<ParamView<T>>& out) override {
    out.push_back({prefix + ".gamma", gamma_.data(), dgamma_.data(), gamma_.size(), {c_}});
    out.push_back({prefix + ".beta", beta_.data(), dbeta_.data(), beta_.size(), {c_}});
  }

  void collect_state(const std::string& prefix, std::vector<StateView<T>>& out) override {
    out.push_back({prefix + ".running_mean", running_mean_.data(), running_mean_.size(), {c_}});
    out.push_back({prefix + ".running_var", running_var_.data(), running_var_.size(), {c_}});
  }

  const char* kind() const override { return "bn"; }

 private:
  int c_;
  double momentum_, eps_;
  Vec<T> gamma_, beta_, dgamma_, dbeta_;
  Vec<T> running_mean_, running_var_;
  Vec<T> mean_, var_, inv_std_;
  Tensor4<T> x_, xhat_;
};

template <typename T>
class ReLU : public Layer<T> {
 public:
  Tensor4<T> forward(const Tensor4<T>& x, Phase, Rng&) override {
    x_ = x;
    Tensor4<T> y = x;
    y.data = y.data.max(T(0));
    return y;
  }
  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx = dy;
    dx.data = (x_.data > T(0)).select(dy.data, T(0));
    return dx;
  }
  const char* kind() const override { return "relu"; }

 private:
  Tensor4<T> x_;
};

template <typename T>
class LeakyReLU : public Layer<T> {
 public:
  explicit LeakyReLU(double slope) : slope_(static_cast<T>(slope)) {}
  Tensor4<T> forward(const Tensor4<T>& x, Phase, Rng&) override {
    x_ = x;
    Tensor4<T> y = x;
    y.data = (x.data > T(0)).select(x.data, x.data * slope_);
    return y;
  }
  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx = dy;
    dx.data = (x_.data > T(0)).select(dy.data, dy.data * slope_);
    return dx;
  }
  const char* kind() const override { return "lrelu"; }

 private:
  T slope_;
  Tensor4<T> x_;
};

template <typename T>
class Tanh : public Layer<T> {
 public:
  Tensor4<T> forward(const Tensor4<T>& x, Phase, Rng&) override {
    y_ = x;
    y_.data = x.data.tanh();
    return y_;
  }
  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx = dy;
    dx.data = dy.data * (T(1) - y_.data.square());
    return dx;
  }
  const char* kind() const override { return "tanh"; }

 private:
  Tensor4<T> y_;
};

/// Inverted dropout; active only in the train phase.
template <typename T>
class Dropout : public Layer<T> {
 public:
  explicit Dropout(double rate) : rate_(rate) {
    if (rate < 0.0 || rate >= 1.0) throw InvalidConfigError("dropout rate must be in [0, 1)");
  }
  Tensor4<T> forward(const Tensor4<T>& x, Phase phase, Rng& rng) override {
    if (phase == Phase::eval || rate_ == 0.0) {
      active_ = false;
      return x;
    }
    active_ = true;
    const T keep_inv = static_cast<T>(1.0 / (1.0 - rate_));
    mask_.resize(x.size());
    Tensor4<T> y = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      mask_(i) = rng.uniform01() < rate_ ? T(0) : keep_inv;
      y.data(i) *= mask_(i);
    }
    return y;
  }
  Tensor4<T> backward(const Tensor4<T>& dy) override {
    if (!active_) return dy;
    Tensor4<T> dx = dy;
    dx.data *= mask_;
    return dx;
  }
  const char* kind() const override { return "dropout"; }

 private:
  double rate_;
  bool active_ = false;
  Eigen::Array<T, Eigen::Dynamic, 1> mask_;
};

template <typename T>
class MaxPool2d : public Layer<T> {
 public:
  explicit MaxPool2d(int window = 2) : window_(window) {}
  Tensor4<T> forward(const Tensor4<T>& x, Phase, Rng&) override {
    if (x.h % window_ != 0 || x.w % window_ != 0) {
      throw ShapeError("MaxPool2d: side not divisible by window");
    }
    in_shape_ = {x.n, x.c, x.h, x.w};
    const int ho = x.h / window_;
    const int wo = x.w / window_;
    Tensor4<T> y(x.n, x.c, ho, wo);
    argmax_.resize(y.size());
    Eigen::Index out_idx = 0;
    for (int i = 0; i < x.n; ++i) {
      for (int ch = 0; ch < x.c; ++ch) {
        auto plane = x.image(i, ch);
        for (int oy = 0; oy < ho; ++oy) {
          for (int ox = 0; ox < wo; ++ox) {
            T best = plane(oy * window_, ox * window_);
            int best_dy = 0, best_dx = 0;
            for (int dy = 0; dy < window_; ++dy) {
              for (int dx = 0; dx < window_; ++dx) {
                T v = plane(oy * window_ + dy, ox * window_ + dx);
                if (v > best) {
                  best = v;
                  best_dy = dy;
                  best_dx = dx;
                }
              }
            }
            y.data(out_idx) = best;
            argmax_(out_idx) =
                (static_cast<Eigen::Index>(i) * x.c + ch) * x.h * x.w +
                static_cast<Eigen::Index>(oy * window_ + best_dy) * x.w + ox * window_ + best_dx;
            ++out_idx;
          }
        }
      }
    }
    return y;
  }
  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx(in_shape_[0], in_shape_[1], in_shape_[2], in_shape_[3]);
    for (Eigen::Index i = 0; i < dy.size(); ++i) dx.data(argmax_(i)) += dy.data(i);
    return dx;
  }
  const char* kind() const override { return "maxpool"; }

 private:
  int window_;
  std::array<int, 4> in_shape_{};
  Eigen::Array<Eigen::Index, Eigen::Dynamic, 1> argmax_;
};

/// Collapses (C, H, W) to a (C*H*W, 1, 1) column so Linear can follow.
template <typename T>
class Flatten : public Layer<T> {
 public:
  Tensor4<T> forward(const Tensor4<T>& x, Phase, Rng&) override {
    in_shape_ = {x.n, x.c, x.h, x.w};
    Tensor4<T> y = x;
    y.c = x.c * x.h * x.w;
    y.h = 1;
    y.w = 1;
    return y;
  }
  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx = dy;
    dx.c = in_shape_[1];
    dx.h = in_shape_[2];
    dx.w = in_shape_[3];
    return dx;
  }
  const char* kind() const override { return "flatten"; }

 private:
  std::array<int, 4> in_shape_{};
};

/// Fully connected layer on (N, C, 1, 1) tensors.
template <typename T>
class Linear : public Layer<T> {
 public:
  Linear(int in_features, int out_features, Init init, Rng& rng)
      : in_(in_features), out_(out_features) {
    weight_.resize(out_features, in_features);
    detail::init_weights(weight_, init, in_features, rng);
    bias_ = Vec<T>::Zero(out_features);
    dweight_ = Mat<T>::Zero(out_features, in_features);
    dbias_ = Vec<T>::Zero(out_features);
  }

  Tensor4<T> forward(const Tensor4<T>& x, Phase, Rng&) override {
    if (x.c != in_ || x.h != 1 || x.w != 1) throw ShapeError("Linear: expected (N, C, 1, 1)");
    x_ = x;
    Tensor4<T> y(x.n, out_, 1, 1);
    // rows() is (N, C); weights applied as y = x W^T + b
    y.rows().noalias() = x.rows() * weight_.transpose();
    y.rows().rowwise() += bias_.transpose();
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx(x_.n, in_, 1, 1);
    dweight_.noalias() += dy.rows().transpose() * x_.rows();
    dbias_ += dy.rows().colwise().sum().transpose();
    dx.rows().noalias() = dy.rows() * weight_;
    return dx;
  }

  void collect_params(const std::string& prefix, std::vector<ParamView<T>>& out) override {
    out.push_back({prefix + ".weight", weight_.data(), dweight_.data(), weight_.size(),
                   {out_, in_}});
    out.push_back({prefix + ".bias", bias_.data(), dbias_.data(), bias_.size(), {out_}});
  }

  const char* kind() const override { return "linear"; }

 private:
  int in_, out_;
  Mat<T> weight_, dweight_;
  Vec<T> bias_, dbias_;
  Tensor4<T> x_;
};

/// Global average pool to (N, C, 1, 1).
template <typename T>
class GlobalAvgPool : public Layer<T> {
 public:
  Tensor4<T> forward(const Tensor4<T>& x, Phase, Rng&) override {
    in_shape_ = {x.n, x.c, x.h, x.w};
    Tensor4<T> y(x.n, x.c, 1, 1);
    const T inv = T(1) / static_cast<T>(x.h * x.w);
    for (int i = 0; i < x.n; ++i) {
      y.channels(i) = x.channels(i).rowwise().sum() * inv;
    }
    return y;
  }
  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx(in_shape_[0], in_shape_[1], in_shape_[2], in_shape_[3]);
    const T inv = T(1) / static_cast<T>(in_shape_[2] * in_shape_[3]);
    for (int i = 0; i < dx.n; ++i) {
      dx.channels(i) = (dy.channels(i) * inv).replicate(1, dx.channels(i).cols());
    }
    return dx;
  }
  const char* kind() const override { return "gap"; }

 private:
  std::array<int, 4> in_shape_{};
};

// ---------------------------------------------------------------------------
// Sequential container.
// ---------------------------------------------------------------------------
template <typename T>
class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  Tensor4<T> forward(Tensor4<T> x, Phase phase, Rng& rng) {
    for (auto& layer : layers_) x = layer->forward(x, phase, rng);
    return x;
  }

  Tensor4<T> backward(Tensor4<T> dy) {
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) dy = (*it)->backward(dy);
    return dy;
  }

  std::vector<ParamView<T>> params() {
    std::vector<ParamView<T>> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      layers_[i]->collect_params("l" + std::to_string(i) + "." + layers_[i]->kind(), out);
    }
    return out;
  }

  std::vector<StateView<T>> state() {
    std::vector<StateView<T>> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      layers_[i]->collect_state("l" + std::to_string(i) + "." + layers_[i]->kind(), out);
    }
    return out;
  }

  void zero_grad() {
    for (auto& p : params()) {
      for (Eigen::Index i = 0; i < p.size; ++i) p.grad[i] = T(0);
    }
  }

  Eigen::Index param_count() {
    Eigen::Index n = 0;
    for (auto& p : params()) n += p.size;
    return n;
  }

  bool empty() const { return layers_.empty(); }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

}  // namespace synthpipe::nn
