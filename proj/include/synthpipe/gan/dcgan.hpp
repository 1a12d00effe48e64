#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "synthpipe/data/frames.hpp"
#include "synthpipe/io/blob.hpp"
#include "synthpipe/io/toml.hpp"
#include "synthpipe/nn/layers.hpp"

namespace synthpipe {

/// Generator: latent column projected to a 4x4 seed map, then
/// n_upsample_stages of (transposed conv, batch norm, ReLU) with channel
/// widths halving from base_channels; final stage emits one channel
/// through tanh, so output_size = 4 * 2^n_upsample_stages and every pixel
/// lies in [-1, 1].
struct GeneratorSpec {
  int latent_dim = 100;
  int base_channels = 512;
  int n_upsample_stages = 6;
  int output_size = 256;

  void validate() const;
};

/// Discriminator: n_downsample_stages of (strided conv, batch norm after
/// the first stage, leaky ReLU, dropout) doubling channel widths from
/// base_channels, then a valid 4x4 conv to a single real-vs-fake logit.
struct DiscriminatorSpec {
  int base_channels = 16;
  int n_downsample_stages = 6;
  double dropout_rate = 0.25;
  double leaky_slope = 0.2;

  int input_size() const { return 4 << n_downsample_stages; }
  void validate() const;
};

struct GanTrainingConfig {
  int batch_size = 16;
  double lr_generator = 1e-5;
  double lr_discriminator = 5e-6;
  int epochs = 100;
  std::uint64_t seed = 0;
  int checkpoint_every = 1;
  int eval_sample_count = 2000;
  bool deterministic = true;
  // First/second moment decays of the adaptive-moment optimizer.
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;

  void validate() const;
};

GanTrainingConfig gan_config_from_toml(const TomlTable& t);
TomlTable gan_config_to_toml(const GanTrainingConfig& cfg, const GeneratorSpec& g,
                             const DiscriminatorSpec& d, const std::string& train_class);

/// Parameter snapshot of both networks plus the config and data provenance
/// needed to audit the run later.
struct GanCheckpoint {
  int epoch = 0;
  GeneratorSpec gspec;
  DiscriminatorSpec dspec;
  GanTrainingConfig config;
  std::string train_class;  // "pos" or "neg"
  std::vector<std::string> train_patients;
  TensorBlob params;  // g.* / d.* tensors plus batch-norm state
};

struct StepLoss {
  long step = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
};

nn::Sequential<float> build_generator(const GeneratorSpec& spec, Rng& rng);
nn::Sequential<float> build_discriminator(const DiscriminatorSpec& spec, Rng& rng);

/// Networks -> named tensor blob and back.
void store_network(nn::Sequential<float>& net, const std::string& prefix, TensorBlob& blob);
void load_network(nn::Sequential<float>& net, const std::string& prefix,
                  const TensorBlob& blob);

void save_checkpoint(const GanCheckpoint& ckpt, const std::filesystem::path& path);
GanCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Batched inference pass through a built generator; every output value is
/// in [-1, 1].
Tensor4<float> generator_forward(const Mat<float>& z_batch, const GeneratorSpec& spec,
                                 nn::Sequential<float>& generator);

/// Per-image real-vs-fake probabilities in (0, 1); dropout is live only
/// when `training` is set.
VecF discriminator_forward(const Tensor4<float>& images, const DiscriminatorSpec& spec,
                           nn::Sequential<float>& discriminator, bool training, Rng& rng);

/// Called after every epoch with the fresh snapshot; wired to the
/// convergence evaluator by the callers that monitor training.
using EpochMonitor = std::function<void(const GanCheckpoint&)>;

struct GanTrainResult {
  std::vector<GanCheckpoint> checkpoints;
  std::vector<StepLoss> losses;
};

/// Alternating discriminator/generator steps on binary cross-entropy with
/// the non-saturating generator objective. Frames must be normalized in
/// unit-range mode. When run_dir is non-empty, writes config.toml,
/// losses.jsonl, and gan_epoch_{N}.ckpt files as it goes.
GanTrainResult train_gan(const FrameSet& frames, const GeneratorSpec& gspec,
                         const DiscriminatorSpec& dspec, const GanTrainingConfig& cfg,
                         const std::string& train_class,
                         const EpochMonitor& monitor = nullptr,
                         const std::filesystem::path& run_dir = {});

/// Seeded standard-normal latent draws through the generator in inference
/// mode. Images are tagged synthetic with the source class of the GAN.
struct SyntheticImageSet {
  std::vector<MatF> images;
  std::string source_class;
  int gan_epoch = 0;
  std::vector<std::string> source_patients;

  /// View as a FrameSet (unit-range scale, synthetic provenance).
  FrameSet to_frame_set(ClassLabel label) const;
};

SyntheticImageSet generate_images(const GanCheckpoint& ckpt, int count, std::uint64_t seed);

}  // namespace synthpipe
