#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace synthpipe {

enum class Split { train, validation, test };

enum class VideoLabel { positive, negative };

/// Per-frame annotation as it appears in the manifest ("pos"/"neg"/"none").
enum class FrameLabel { positive, negative, unlabeled };

/// Frame class after applying the clean-label rules.
enum class DerivedLabel { positive, negative, excluded };

std::string to_string(Split s);
std::string to_string(VideoLabel l);
std::string to_string(FrameLabel l);

struct FrameRecord {
  std::string frame_id;
  std::string image_path;  // relative paths resolve against the manifest dir
  FrameLabel frame_label = FrameLabel::unlabeled;
};

struct VideoRecord {
  std::string video_id;
  VideoLabel video_label = VideoLabel::negative;
  std::vector<FrameRecord> frames;
};

struct PatientRecord {
  std::string patient_id;
  Split split = Split::train;
  std::vector<VideoRecord> videos;
};

/// Patient -> video -> frame hierarchy with patient-level split assignment.
struct DatasetManifest {
  std::vector<PatientRecord> patients;
  std::int64_t split_seed = 0;
  std::string source_name;
  std::filesystem::path base_dir;  // directory the manifest was loaded from

  std::filesystem::path resolve(const std::string& image_path) const;
};

struct SplitClassCounts {
  std::int64_t patients = 0;
  std::int64_t videos = 0;
  std::int64_t frames = 0;
};

struct ManifestCounts {
  // [split][class]: class 0 = negative, 1 = positive (video label).
  SplitClassCounts by[3][2];

  SplitClassCounts& at(Split s, VideoLabel l) {
    return by[static_cast<int>(s)][l == VideoLabel::positive ? 1 : 0];
  }
  const SplitClassCounts& at(Split s, VideoLabel l) const {
    return by[static_cast<int>(s)][l == VideoLabel::positive ? 1 : 0];
  }
};

/// Patient class for pool construction: a patient is positive when any of
/// its videos is consolidation-positive.
bool patient_is_positive(const PatientRecord& p);

ManifestCounts count_manifest(const DatasetManifest& m);

/// Parses manifest JSONL (one object per frame with keys patient_id, split,
/// video_id, video_label, frame_id, frame_label, image_path). Enforces the
/// hierarchy invariants: unique frame ids, one patient per video, one label
/// per video, one split per patient, and no positive frame annotation
/// inside a negative video.
DatasetManifest load_manifest(const std::filesystem::path& path);

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);

/// Clean-label rules: positive annotations inside positive videos are
/// positive, every frame of a negative video is negative, and unannotated
/// frames of positive videos are excluded.
std::unordered_map<std::string, DerivedLabel> derive_frame_labels(const DatasetManifest& m);

}  // namespace synthpipe
