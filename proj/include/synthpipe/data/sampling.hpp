#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synthpipe/data/frames.hpp"
#include "synthpipe/data/manifest.hpp"

namespace synthpipe {

/// Frame reference resolved through the manifest.
struct FrameRef {
  std::string frame_id;
  std::string image_path;
  std::string patient_id;
  std::string video_id;
  ClassLabel label = ClassLabel::negative;
};

/// A seeded ablation draw: patient_count patients from each class pool of
/// the training split, with frame counts balanced by downsampling the
/// majority class.
struct SubsetSelection {
  std::vector<std::string> positive_patients;
  std::vector<std::string> negative_patients;
  std::vector<FrameRef> frames;  // balanced, positives then negatives
};

/// Usable frames of one split after the clean-label rules (excluded frames
/// dropped).
std::vector<FrameRef> collect_split_frames(const DatasetManifest& m, Split split);

SubsetSelection sample_ablation_selection(const DatasetManifest& m, int patient_count,
                                          std::uint64_t replicate_seed);

/// Loads PNGs and preprocesses a list of frame references.
FrameSet materialize_frames(const DatasetManifest& m, const std::vector<FrameRef>& refs,
                            const CropSpec& crop, NormMode mode, int target_side);

/// sample_ablation_selection + materialize_frames. The returned set has
/// exactly equal class counts.
FrameSet sample_ablation_subset(const DatasetManifest& m, int patient_count,
                                std::uint64_t replicate_seed, const CropSpec& crop,
                                NormMode mode, int target_side);

}  // namespace synthpipe
