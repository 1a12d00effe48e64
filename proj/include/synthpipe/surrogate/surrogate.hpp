#pragma once

#include <cstdint>
#include <filesystem>

#include "synthpipe/core/mat.hpp"
#include "synthpipe/data/manifest.hpp"

namespace synthpipe {

/// Procedural ultrasound-like dataset: multiplicative speckle over a
/// fan-shaped bright band, with bright sub-band blobs on positive frames.
/// Labels are exact by construction, so the downstream task is learnable
/// at desk scale without the clinical data.
struct SurrogateSpec {
  int image_size = 128;
  int n_patients = 24;
  int videos_per_patient = 3;
  int frames_per_video = 10;
  double positive_fraction = 0.5;
  std::uint64_t seed = 0;
  double blob_intensity = 0.8;
  double speckle_grain = 1.5;  // pixels
  // Split fractions at the patient level; remainder goes to test.
  double train_fraction = 0.6;
  double validation_fraction = 0.2;

  void validate() const;
};

SurrogateSpec surrogate_spec_from_toml(const std::filesystem::path& path);

/// Renders one frame deterministically from (spec.seed, patient, video,
/// frame) indices; values in [0, 1].
MatF render_surrogate_frame(const SurrogateSpec& spec, int patient, int video, int frame,
                            bool positive);

/// Writes PNGs plus manifest.jsonl under out_dir and returns the manifest.
DatasetManifest generate_surrogate(const SurrogateSpec& spec,
                                   const std::filesystem::path& out_dir);

}  // namespace synthpipe
