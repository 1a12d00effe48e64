#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "synthpipe/core/image_ops.hpp"
#include "synthpipe/core/mat.hpp"
#include "synthpipe/data/manifest.hpp"

namespace synthpipe {

enum class ClassLabel { positive, negative };

inline std::string to_string(ClassLabel l) {
  return l == ClassLabel::positive ? "pos" : "neg";
}

/// One normalized single-channel frame with its provenance. patient_id and
/// video_id travel with the frame so split integrity stays assertable all
/// the way to the report stage; synthetic frames carry the source GAN tag
/// in frame_id and an empty patient set semantics (their provenance is the
/// GAN's training patients, tracked at the run level).
struct PreprocessedFrame {
  MatF pixels;
  std::string frame_id;
  ClassLabel label = ClassLabel::negative;
  std::string patient_id;
  std::string video_id;
  bool synthetic = false;
};

struct FrameSet {
  std::vector<PreprocessedFrame> frames;
  std::map<ClassLabel, std::size_t> class_counts;
  NormMode norm_mode = NormMode::zscore;
  int side = 256;

  void add(PreprocessedFrame frame) {
    class_counts[frame.label] += 1;
    frames.push_back(std::move(frame));
  }
  std::size_t count(ClassLabel l) const {
    auto it = class_counts.find(l);
    return it == class_counts.end() ? 0 : it->second;
  }
  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }

  /// True when class_counts matches the actual tally.
  bool counts_consistent() const;

  /// Distinct patient ids of the real frames in this set.
  std::vector<std::string> patient_ids() const;

  bool contains_synthetic() const;
};

/// Crop -> mask -> resize -> normalize, with provenance attached.
PreprocessedFrame preprocess_frame(const MatF& raw, const CropSpec& spec, NormMode mode,
                                   int target_side, std::string frame_id, ClassLabel label,
                                   std::string patient_id = {}, std::string video_id = {});

/// Serializes a frame set as one .spf file per frame plus a frames.jsonl
/// index carrying labels and provenance.
void write_frame_dir(const std::filesystem::path& dir, const FrameSet& set);

FrameSet read_frame_dir(const std::filesystem::path& dir);

/// Re-standardizes a frame to zero mean / unit std. Used to feed GAN
/// output (unit-range scale) into classifiers trained on z-score frames;
/// near-constant frames fall back to zeros instead of erroring so early
/// degenerate generator output can still be scored.
MatF to_zscore_scale(const MatF& pixels);

}  // namespace synthpipe
