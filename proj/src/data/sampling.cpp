#include "synthpipe/data/sampling.hpp"

#include <algorithm>

#include "synthpipe/core/errors.hpp"
#include "synthpipe/core/rng.hpp"
#include "synthpipe/io/png_io.hpp"

namespace synthpipe {

std::vector<FrameRef> collect_split_frames(const DatasetManifest& m, Split split) {
  std::vector<FrameRef> out;
  for (const auto& p : m.patients) {
    if (p.split != split) continue;
    for (const auto& v : p.videos) {
      for (const auto& f : v.frames) {
        if (v.video_label == VideoLabel::negative) {
          out.push_back({f.frame_id, f.image_path, p.patient_id, v.video_id,
                         ClassLabel::negative});
        } else if (f.frame_label == FrameLabel::positive) {
          out.push_back({f.frame_id, f.image_path, p.patient_id, v.video_id,
                         ClassLabel::positive});
        }
        // Unannotated frames of positive videos are excluded.
      }
    }
  }
  return out;
}

namespace {

struct PatientFrames {
  std::string patient_id;
  std::vector<FrameRef> frames;
};

}  // namespace

SubsetSelection sample_ablation_selection(const DatasetManifest& m, int patient_count,
                                          std::uint64_t replicate_seed) {
  if (patient_count <= 0) throw InvalidConfigError("patient_count must be positive");

  // Per-class patient pools over derived training frames, ordered by id so
  // the draw is a pure function of (manifest contents, seed).
  std::map<std::string, PatientFrames> pos_pool, neg_pool;
  for (const auto& ref : collect_split_frames(m, Split::train)) {
    auto& pool = ref.label == ClassLabel::positive ? pos_pool : neg_pool;
    pool[ref.patient_id].patient_id = ref.patient_id;
    pool[ref.patient_id].frames.push_back(ref);
  }
  if (static_cast<int>(pos_pool.size()) < patient_count ||
      static_cast<int>(neg_pool.size()) < patient_count) {
    throw InsufficientPatientsError(
        "requested " + std::to_string(patient_count) + " patients per class, pools have " +
        std::to_string(pos_pool.size()) + " positive / " + std::to_string(neg_pool.size()) +
        " negative");
  }

  auto draw = [&](const std::map<std::string, PatientFrames>& pool, std::uint64_t tag,
                  std::vector<std::string>& chosen, std::vector<FrameRef>& frames) {
    std::vector<const PatientFrames*> entries;
    entries.reserve(pool.size());
    for (const auto& [id, pf] : pool) entries.push_back(&pf);
    Rng rng = Rng::substream(replicate_seed, {0x9A71E57ull, tag});
    for (int idx : rng.sample_without_replacement(static_cast<int>(entries.size()),
                                                  patient_count)) {
      chosen.push_back(entries[static_cast<std::size_t>(idx)]->patient_id);
      const auto& pf = entries[static_cast<std::size_t>(idx)]->frames;
      frames.insert(frames.end(), pf.begin(), pf.end());
    }
    std::sort(chosen.begin(), chosen.end());
  };

  SubsetSelection sel;
  std::vector<FrameRef> pos_frames, neg_frames;
  draw(pos_pool, 1, sel.positive_patients, pos_frames);
  draw(neg_pool, 2, sel.negative_patients, neg_frames);

  // Balance frame counts by uniformly downsampling the majority class.
  auto downsample = [&](std::vector<FrameRef>& v, std::size_t target, std::uint64_t tag) {
    if (v.size() <= target) return;
    Rng rng = Rng::substream(replicate_seed, {0xBA1A9CEull, tag});
    auto keep = rng.sample_without_replacement(static_cast<int>(v.size()),
                                               static_cast<int>(target));
    std::sort(keep.begin(), keep.end());
    std::vector<FrameRef> kept;
    kept.reserve(target);
    for (int i : keep) kept.push_back(std::move(v[static_cast<std::size_t>(i)]));
    v = std::move(kept);
  };
  const std::size_t target = std::min(pos_frames.size(), neg_frames.size());
  if (target == 0) throw EmptyDatasetError("ablation subset has an empty class");
  downsample(pos_frames, target, 1);
  downsample(neg_frames, target, 2);

  sel.frames = std::move(pos_frames);
  sel.frames.insert(sel.frames.end(), neg_frames.begin(), neg_frames.end());
  return sel;
}

FrameSet materialize_frames(const DatasetManifest& m, const std::vector<FrameRef>& refs,
                            const CropSpec& crop, NormMode mode, int target_side) {
  FrameSet set;
  set.norm_mode = mode;
  set.side = target_side;
  set.frames.resize(refs.size());
  // Frames are independent; the loop is trivially parallelizable and the
  // per-slot writes keep results identical to sequential execution.
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& ref = refs[i];
    MatF raw = read_png_gray_f32(m.resolve(ref.image_path));
    CropSpec spec = crop;
    if (spec.height == 0 || spec.width == 0) {
      spec = CropSpec::identity(static_cast<int>(raw.rows()), static_cast<int>(raw.cols()));
    }
    set.frames[i] = preprocess_frame(raw, spec, mode, target_side, ref.frame_id, ref.label,
                                     ref.patient_id, ref.video_id);
  }
  for (const auto& f : set.frames) set.class_counts[f.label] += 1;
  return set;
}

FrameSet sample_ablation_subset(const DatasetManifest& m, int patient_count,
                                std::uint64_t replicate_seed, const CropSpec& crop,
                                NormMode mode, int target_side) {
  SubsetSelection sel = sample_ablation_selection(m, patient_count, replicate_seed);
  return materialize_frames(m, sel.frames, crop, mode, target_side);
}

}  // namespace synthpipe
