#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "synthpipe/core/mat.hpp"

namespace synthpipe {

/// Maps single-channel images to fixed-length feature vectors for the
/// distributional metrics. Implementations replicate the channel to their
/// expected input depth and reduce through a global-average-pooled
/// penultimate layer. The handle is pluggable so an offline run can use
/// the fixed random-weight convolutional encoder in place of a pretrained
/// model.
class EmbeddingBackbone {
 public:
  virtual ~EmbeddingBackbone() = default;
  virtual int dim() const = 0;
  virtual std::string name() const = 0;
  /// One row per image, in input order. Input values are expected on the
  /// unit-range scale ([-1, 1]); anything outside is clamped.
  virtual Eigen::MatrixXd embed_batch(const std::vector<MatF>& images) const = 0;
};

/// Known names: "random_conv" (512-dim fixed-seed conv encoder) and
/// "random_conv_<dim>" for reduced widths. Throws BackboneLoadError for
/// anything else.
std::unique_ptr<EmbeddingBackbone> make_backbone(const std::string& name);

/// Batched embedding of a whole image list; order-preserving, one vector
/// per image.
Eigen::MatrixXd embed_images(const std::vector<MatF>& images, const EmbeddingBackbone& backbone,
                             int batch_size = 64);

/// Binary embedding file: u32 count, u32 dim, float32 row-major.
void write_embeddings(const std::filesystem::path& path, const Eigen::MatrixXd& emb);
Eigen::MatrixXd read_embeddings(const std::filesystem::path& path);

}  // namespace synthpipe
