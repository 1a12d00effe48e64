#include "synthpipe/data/frames.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>

#include "synthpipe/core/errors.hpp"
#include "synthpipe/io/spf_io.hpp"

namespace synthpipe {

bool FrameSet::counts_consistent() const {
  std::map<ClassLabel, std::size_t> tally;
  for (const auto& f : frames) tally[f.label] += 1;
  for (const auto& [label, count] : class_counts) {
    if (count != 0 && (tally.count(label) == 0 || tally.at(label) != count)) return false;
  }
  for (const auto& [label, count] : tally) {
    if (this->count(label) != count) return false;
  }
  return true;
}

std::vector<std::string> FrameSet::patient_ids() const {
  std::set<std::string> ids;
  for (const auto& f : frames) {
    if (!f.synthetic && !f.patient_id.empty()) ids.insert(f.patient_id);
  }
  return {ids.begin(), ids.end()};
}

bool FrameSet::contains_synthetic() const {
  for (const auto& f : frames) {
    if (f.synthetic) return true;
  }
  return false;
}

PreprocessedFrame preprocess_frame(const MatF& raw, const CropSpec& spec, NormMode mode,
                                   int target_side, std::string frame_id, ClassLabel label,
                                   std::string patient_id, std::string video_id) {
  PreprocessedFrame frame;
  frame.pixels = preprocess_pixels(raw, spec, mode, target_side);
  frame.frame_id = std::move(frame_id);
  frame.label = label;
  frame.patient_id = std::move(patient_id);
  frame.video_id = std::move(video_id);
  return frame;
}

void write_frame_dir(const std::filesystem::path& dir, const FrameSet& set) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / "frames.jsonl");
  if (!index) throw IoError("cannot create frame index in " + dir.string());
  for (const auto& f : set.frames) {
    const std::string file = f.frame_id + ".spf";
    write_spf(dir / file, f.pixels);
    nlohmann::json obj;
    obj["frame_id"] = f.frame_id;
    obj["file"] = file;
    obj["label"] = to_string(f.label);
    obj["patient_id"] = f.patient_id;
    obj["video_id"] = f.video_id;
    obj["synthetic"] = f.synthetic;
    index << obj.dump() << "\n";
  }
  nlohmann::json meta;
  meta["norm_mode"] = set.norm_mode == NormMode::zscore ? "zscore" : "unit_range";
  meta["side"] = set.side;
  meta["count"] = set.frames.size();
  std::ofstream meta_os(dir / "frameset.json");
  meta_os << meta.dump(2) << "\n";
  if (!meta_os) throw IoError("cannot write frameset.json in " + dir.string());
}

FrameSet read_frame_dir(const std::filesystem::path& dir) {
  std::ifstream index(dir / "frames.jsonl");
  if (!index) throw IoError("cannot open frame index in " + dir.string());
  FrameSet set;
  std::ifstream meta_is(dir / "frameset.json");
  if (meta_is) {
    nlohmann::json meta = nlohmann::json::parse(meta_is, nullptr, false);
    if (!meta.is_discarded()) {
      set.norm_mode =
          meta.value("norm_mode", "zscore") == "unit_range" ? NormMode::unit_range : NormMode::zscore;
      set.side = meta.value("side", 256);
    }
  }
  std::string line;
  int line_no = 0;
  while (std::getline(index, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded()) {
      throw ParseError("frames.jsonl line " + std::to_string(line_no) + ": malformed JSON");
    }
    PreprocessedFrame f;
    f.frame_id = obj.at("frame_id").get<std::string>();
    f.label = obj.at("label").get<std::string>() == "pos" ? ClassLabel::positive
                                                          : ClassLabel::negative;
    f.patient_id = obj.value("patient_id", "");
    f.video_id = obj.value("video_id", "");
    f.synthetic = obj.value("synthetic", false);
    f.pixels = read_spf(dir / obj.at("file").get<std::string>());
    set.add(std::move(f));
  }
  if (!set.frames.empty()) set.side = static_cast<int>(set.frames.front().pixels.rows());
  return set;
}

MatF to_zscore_scale(const MatF& pixels) {
  const double n = static_cast<double>(pixels.size());
  const double mean = pixels.cast<double>().sum() / n;
  const double var = (pixels.cast<double>().array() - mean).square().sum() / n;
  const double sd = std::max(std::sqrt(var), 1e-8);
  return ((pixels.cast<double>().array() - mean) / sd).cast<float>().matrix();
}

}  // namespace synthpipe
