#include "synthpipe/data/manifest.hpp"

#include <fstream>
#include <json.hpp>
#include <unordered_set>

#include "synthpipe/core/errors.hpp"

namespace synthpipe {

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

std::string to_string(VideoLabel l) { return l == VideoLabel::positive ? "pos" : "neg"; }

std::string to_string(FrameLabel l) {
  switch (l) {
    case FrameLabel::positive: return "pos";
    case FrameLabel::negative: return "neg";
    case FrameLabel::unlabeled: return "none";
  }
  return "?";
}

namespace {

Split parse_split(const std::string& s, int line) {
  if (s == "train") return Split::train;
  if (s == "validation") return Split::validation;
  if (s == "test") return Split::test;
  throw ParseError("manifest line " + std::to_string(line) + ": bad split '" + s + "'");
}

VideoLabel parse_video_label(const std::string& s, int line) {
  if (s == "pos") return VideoLabel::positive;
  if (s == "neg") return VideoLabel::negative;
  throw ParseError("manifest line " + std::to_string(line) + ": bad video_label '" + s + "'");
}

FrameLabel parse_frame_label(const std::string& s, int line) {
  if (s == "pos") return FrameLabel::positive;
  if (s == "neg") return FrameLabel::negative;
  if (s == "none") return FrameLabel::unlabeled;
  throw ParseError("manifest line " + std::to_string(line) + ": bad frame_label '" + s + "'");
}

std::string require_string(const nlohmann::json& obj, const char* key, int line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError("manifest line " + std::to_string(line) + ": missing key '" + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

std::filesystem::path DatasetManifest::resolve(const std::string& image_path) const {
  std::filesystem::path p(image_path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

bool patient_is_positive(const PatientRecord& p) {
  for (const auto& v : p.videos) {
    if (v.video_label == VideoLabel::positive) return true;
  }
  return false;
}

ManifestCounts count_manifest(const DatasetManifest& m) {
  ManifestCounts counts;
  for (const auto& p : m.patients) {
    // Patient counted under its video-level class (any positive video
    // makes the patient positive).
    counts.at(p.split, patient_is_positive(p) ? VideoLabel::positive : VideoLabel::negative)
        .patients += 1;
    for (const auto& v : p.videos) {
      auto& slot = counts.at(p.split, v.video_label);
      slot.videos += 1;
      slot.frames += static_cast<std::int64_t>(v.frames.size());
    }
  }
  return counts;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path.string());

  DatasetManifest manifest;
  manifest.source_name = path.filename().string();
  manifest.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

  std::unordered_map<std::string, std::size_t> patient_index;
  // video_id -> (patient_id, label, index within patient)
  struct VideoInfo {
    std::string patient_id;
    VideoLabel label;
    std::size_t index;
  };
  std::unordered_map<std::string, VideoInfo> video_index;
  std::unordered_set<std::string> frame_ids;

  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": malformed JSON");
    }
    const std::string patient_id = require_string(obj, "patient_id", line_no);
    const Split split = parse_split(require_string(obj, "split", line_no), line_no);
    const std::string video_id = require_string(obj, "video_id", line_no);
    const VideoLabel video_label =
        parse_video_label(require_string(obj, "video_label", line_no), line_no);
    const std::string frame_id = require_string(obj, "frame_id", line_no);
    const FrameLabel frame_label =
        parse_frame_label(require_string(obj, "frame_label", line_no), line_no);
    const std::string image_path = require_string(obj, "image_path", line_no);

    if (!frame_ids.insert(frame_id).second) {
      throw DuplicateIdError("manifest line " + std::to_string(line_no) +
                             ": duplicate frame_id '" + frame_id + "'");
    }
    if (video_label == VideoLabel::negative && frame_label == FrameLabel::positive) {
      throw HierarchyError("manifest line " + std::to_string(line_no) +
                           ": positive frame annotation inside negative video '" + video_id +
                           "'");
    }

    auto [pit, p_new] = patient_index.try_emplace(patient_id, manifest.patients.size());
    if (p_new) {
      manifest.patients.push_back(PatientRecord{patient_id, split, {}});
    } else if (manifest.patients[pit->second].split != split) {
      throw HierarchyError("manifest line " + std::to_string(line_no) + ": patient '" +
                           patient_id + "' assigned to more than one split");
    }
    PatientRecord& patient = manifest.patients[pit->second];

    auto vit = video_index.find(video_id);
    if (vit == video_index.end()) {
      video_index.emplace(video_id, VideoInfo{patient_id, video_label, patient.videos.size()});
      patient.videos.push_back(VideoRecord{video_id, video_label, {}});
      vit = video_index.find(video_id);
    } else {
      if (vit->second.patient_id != patient_id) {
        throw HierarchyError("manifest line " + std::to_string(line_no) + ": frame '" +
                             frame_id + "' assigned to video '" + video_id +
                             "' which belongs to patient '" + vit->second.patient_id + "'");
      }
      if (vit->second.label != video_label) {
        throw HierarchyError("manifest line " + std::to_string(line_no) + ": video '" +
                             video_id + "' has conflicting labels");
      }
    }
    patient.videos[vit->second.index].frames.push_back(
        FrameRecord{frame_id, image_path, frame_label});
  }
  return manifest;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot create manifest: " + path.string());
  for (const auto& p : m.patients) {
    for (const auto& v : p.videos) {
      for (const auto& f : v.frames) {
        nlohmann::json obj;
        obj["patient_id"] = p.patient_id;
        obj["split"] = to_string(p.split);
        obj["video_id"] = v.video_id;
        obj["video_label"] = to_string(v.video_label);
        obj["frame_id"] = f.frame_id;
        obj["frame_label"] = to_string(f.frame_label);
        obj["image_path"] = f.image_path;
        os << obj.dump() << "\n";
      }
    }
  }
  if (!os) throw IoError("short manifest write: " + path.string());
}

std::unordered_map<std::string, DerivedLabel> derive_frame_labels(const DatasetManifest& m) {
  std::unordered_map<std::string, DerivedLabel> out;
  for (const auto& p : m.patients) {
    for (const auto& v : p.videos) {
      for (const auto& f : v.frames) {
        DerivedLabel label;
        if (v.video_label == VideoLabel::negative) {
          label = DerivedLabel::negative;
        } else if (f.frame_label == FrameLabel::positive) {
          label = DerivedLabel::positive;
        } else {
          label = DerivedLabel::excluded;
        }
        out.emplace(f.frame_id, label);
      }
    }
  }
  return out;
}

}  // namespace synthpipe
