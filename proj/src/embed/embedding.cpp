#include "synthpipe/embed/embedding.hpp"

#include <cstdint>
#include <fstream>

#include "synthpipe/core/errors.hpp"
#include "synthpipe/core/rng.hpp"
#include "synthpipe/nn/layers.hpp"

namespace synthpipe {

namespace {

/// Fixed-seed random-weight convolutional encoder: four strided conv +
/// leaky ReLU stages over a 3-channel input, global average pool to the
/// requested width. Weights never train, so embeddings are a pure function
/// of the input.
class RandomConvEncoder : public EmbeddingBackbone {
 public:
  explicit RandomConvEncoder(int dim) : dim_(dim) {
    if (dim < 8 || dim > 4096) throw BackboneLoadError("random_conv: dim out of range");
    Rng rng(0x57A71CF0ull);  // fixed: the encoder is part of the metric definition
    const int c1 = std::max(dim / 16, 8);
    const int c2 = std::max(dim / 8, 8);
    const int c3 = std::max(dim / 4, 8);
    net_.emplace<nn::Conv2d<float>>(3, c1, 3, 2, 1, nn::Init::he, rng);
    net_.emplace<nn::LeakyReLU<float>>(0.1);
    net_.emplace<nn::Conv2d<float>>(c1, c2, 3, 2, 1, nn::Init::he, rng);
    net_.emplace<nn::LeakyReLU<float>>(0.1);
    net_.emplace<nn::Conv2d<float>>(c2, c3, 3, 2, 1, nn::Init::he, rng);
    net_.emplace<nn::LeakyReLU<float>>(0.1);
    net_.emplace<nn::Conv2d<float>>(c3, dim, 3, 2, 1, nn::Init::he, rng);
    net_.emplace<nn::LeakyReLU<float>>(0.1);
    net_.emplace<nn::GlobalAvgPool<float>>();
  }

  int dim() const override { return dim_; }
  std::string name() const override { return "random_conv_" + std::to_string(dim_); }

  Eigen::MatrixXd embed_batch(const std::vector<MatF>& images) const override {
    if (images.empty()) return Eigen::MatrixXd(0, dim_);
    const int side = static_cast<int>(images.front().rows());
    if (side < 16) throw ShapeError("embedding input must be at least 16x16");
    const int n = static_cast<int>(images.size());
    Tensor4<float> batch(n, 3, side, side);
    for (int i = 0; i < n; ++i) {
      const MatF& img = images[static_cast<std::size_t>(i)];
      if (img.rows() != side || img.cols() != side) {
        throw ShapeError("embedding batch images must share one square size");
      }
      // Channel replication of the clamped single-channel image.
      MatF clamped = img.cwiseMax(-1.0f).cwiseMin(1.0f);
      for (int ch = 0; ch < 3; ++ch) batch.image(i, ch) = clamped;
    }
    Rng rng(0);
    // Layer caches make forward a mutating call; the lock keeps concurrent
    // batched inference safe.
    std::lock_guard<std::mutex> guard(forward_mutex_);
    Tensor4<float> out = const_cast<nn::Sequential<float>&>(net_).forward(
        std::move(batch), nn::Phase::eval, rng);
    Eigen::MatrixXd emb(n, dim_);
    for (int i = 0; i < n; ++i) {
      emb.row(i) = out.channels(i).col(0).cast<double>().transpose();
    }
    if (!emb.allFinite()) throw BackboneLoadError("embedding produced non-finite values");
    return emb;
  }

 private:
  int dim_;
  nn::Sequential<float> net_;  // forward-only; layer caches are scratch space
  mutable std::mutex forward_mutex_;
};

}  // namespace

std::unique_ptr<EmbeddingBackbone> make_backbone(const std::string& name) {
  if (name == "random_conv") return std::make_unique<RandomConvEncoder>(512);
  const std::string prefix = "random_conv_";
  if (name.rfind(prefix, 0) == 0) {
    try {
      return std::make_unique<RandomConvEncoder>(std::stoi(name.substr(prefix.size())));
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
  }
  throw BackboneLoadError("unknown embedding backbone: " + name);
}

Eigen::MatrixXd embed_images(const std::vector<MatF>& images, const EmbeddingBackbone& backbone,
                             int batch_size) {
  if (batch_size < 1) throw InvalidConfigError("embed_images: batch_size must be >= 1");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(images.size()), backbone.dim());
  std::size_t done = 0;
  while (done < images.size()) {
    const std::size_t bs = std::min<std::size_t>(batch_size, images.size() - done);
    std::vector<MatF> chunk(images.begin() + static_cast<std::ptrdiff_t>(done),
                            images.begin() + static_cast<std::ptrdiff_t>(done + bs));
    out.middleRows(static_cast<Eigen::Index>(done), static_cast<Eigen::Index>(bs)) =
        backbone.embed_batch(chunk);
    done += bs;
  }
  return out;
}

void write_embeddings(const std::filesystem::path& path, const Eigen::MatrixXd& emb) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot create embeddings file: " + path.string());
  const std::uint32_t count = static_cast<std::uint32_t>(emb.rows());
  const std::uint32_t dim = static_cast<std::uint32_t>(emb.cols());
  auto put_u32 = [&os](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    os.write(reinterpret_cast<const char*>(b), 4);
  };
  put_u32(count);
  put_u32(dim);
  for (Eigen::Index i = 0; i < emb.rows(); ++i) {
    for (Eigen::Index j = 0; j < emb.cols(); ++j) {
      const float v = static_cast<float>(emb(i, j));
      os.write(reinterpret_cast<const char*>(&v), sizeof(float));
    }
  }
  if (!os) throw IoError("short embeddings write: " + path.string());
}

Eigen::MatrixXd read_embeddings(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open embeddings file: " + path.string());
  auto get_u32 = [&is]() {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };
  const std::uint32_t count = get_u32();
  const std::uint32_t dim = get_u32();
  if (!is) throw ParseError("bad embeddings header: " + path.string());
  Eigen::MatrixXd emb(count, dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    for (std::uint32_t j = 0; j < dim; ++j) {
      float v;
      is.read(reinterpret_cast<char*>(&v), sizeof(float));
      emb(i, j) = v;
    }
  }
  if (!is) throw ParseError("truncated embeddings payload: " + path.string());
  return emb;
}

}  // namespace synthpipe
