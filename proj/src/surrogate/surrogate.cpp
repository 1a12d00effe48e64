#include "synthpipe/surrogate/surrogate.hpp"

#include <cmath>
#include <numbers>

#include "synthpipe/core/errors.hpp"
#include "synthpipe/core/image_ops.hpp"
#include "synthpipe/core/rng.hpp"
#include "synthpipe/io/png_io.hpp"
#include "synthpipe/io/toml.hpp"

namespace synthpipe {

void SurrogateSpec::validate() const {
  if (image_size < 16) throw InvalidConfigError("surrogate: image_size must be >= 16");
  if (n_patients <= 0 || videos_per_patient <= 0 || frames_per_video <= 0) {
    throw InvalidConfigError("surrogate: all counts must be positive");
  }
  if (positive_fraction < 0.0 || positive_fraction > 1.0) {
    throw InvalidConfigError("surrogate: positive_fraction must be in [0, 1]");
  }
  if (train_fraction < 0.0 || validation_fraction < 0.0 ||
      train_fraction + validation_fraction > 1.0) {
    throw InvalidConfigError("surrogate: bad split fractions");
  }
}

SurrogateSpec surrogate_spec_from_toml(const std::filesystem::path& path) {
  TomlTable t = load_toml(path);
  SurrogateSpec s;
  s.image_size = static_cast<int>(t.get_int("", "image_size", s.image_size));
  s.n_patients = static_cast<int>(t.get_int("", "n_patients", s.n_patients));
  s.videos_per_patient =
      static_cast<int>(t.get_int("", "videos_per_patient", s.videos_per_patient));
  s.frames_per_video = static_cast<int>(t.get_int("", "frames_per_video", s.frames_per_video));
  s.positive_fraction = t.get_double("", "positive_fraction", s.positive_fraction);
  s.seed = static_cast<std::uint64_t>(t.get_int("", "seed", static_cast<std::int64_t>(s.seed)));
  s.blob_intensity = t.get_double("", "blob_intensity", s.blob_intensity);
  s.speckle_grain = t.get_double("", "speckle_grain", s.speckle_grain);
  s.train_fraction = t.get_double("", "train_fraction", s.train_fraction);
  s.validation_fraction = t.get_double("", "validation_fraction", s.validation_fraction);
  s.validate();
  return s;
}

namespace {

struct Blob {
  double cy, cx;      // normalized center
  double ry, rx;      // normalized radii
  double angle;       // rotation
  double gain;
};

struct VideoGeometry {
  double band_radius;     // pleural-band arc radius (normalized)
  double band_gain;
  double fan_half_angle;
  double echo_gain;       // A-line style echo of the band
  std::vector<Blob> blobs;
};

VideoGeometry make_video_geometry(const SurrogateSpec& spec, int patient, int video,
                                  bool positive) {
  Rng rng = Rng::substream(spec.seed, {0x51DE0ull, static_cast<std::uint64_t>(patient),
                                       static_cast<std::uint64_t>(video)});
  VideoGeometry g;
  g.band_radius = rng.uniform(0.40, 0.50);
  g.band_gain = rng.uniform(0.75, 0.95);
  g.fan_half_angle = rng.uniform(0.48, 0.58);
  g.echo_gain = rng.uniform(0.15, 0.30);
  if (positive) {
    const int n_blobs = rng.uniform_int(1, 3);
    for (int b = 0; b < n_blobs; ++b) {
      Blob blob;
      blob.cy = rng.uniform(g.band_radius + 0.12, 0.85);  // radial position below band
      blob.cx = rng.uniform(-0.6, 0.6) * g.fan_half_angle;  // angular position
      blob.ry = rng.uniform(0.05, 0.12);
      blob.rx = blob.ry * rng.uniform(0.6, 1.4);
      blob.angle = rng.uniform(0.0, std::numbers::pi);
      blob.gain = spec.blob_intensity * rng.uniform(0.8, 1.0);
      g.blobs.push_back(blob);
    }
  }
  return g;
}

}  // namespace

MatF render_surrogate_frame(const SurrogateSpec& spec, int patient, int video, int frame,
                            bool positive) {
  const int s = spec.image_size;
  const VideoGeometry geom = make_video_geometry(spec, patient, video, positive);
  Rng rng = Rng::substream(spec.seed, {0xF7A3Eull, static_cast<std::uint64_t>(patient),
                                       static_cast<std::uint64_t>(video),
                                       static_cast<std::uint64_t>(frame)});
  // Small per-frame wobble so frames of a video are near-duplicates, not
  // exact copies.
  const double jitter_r = rng.uniform(-0.01, 0.01);
  const double jitter_a = rng.uniform(-0.02, 0.02);

  // Raw exponential speckle field, then a small Gaussian smoothing kernel
  // sets the grain size.
  MatF speckle(s, s);
  for (Eigen::Index i = 0; i < speckle.size(); ++i) {
    speckle.data()[i] = static_cast<float>(rng.exponential());
  }
  speckle = gaussian_blur(speckle, spec.speckle_grain);

  // Probe apex sits above the top edge; the fan opens downward.
  const double apex_y = -0.25;
  const double apex_x = 0.5;

  MatF img(s, s);
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      const double v = (y + 0.5) / s;
      const double u = (x + 0.5) / s;
      const double dy = v - apex_y;
      const double dx = u - apex_x;
      const double r = std::hypot(dx, dy) + jitter_r;
      const double a = std::atan2(dx, dy) + jitter_a;

      double base = 0.02;  // outside-fan floor
      if (std::abs(a) <= geom.fan_half_angle && r >= 0.28 && r <= 1.20) {
        // Depth-attenuated tissue brightness.
        base = 0.06 + 0.30 * std::exp(-std::max(0.0, r - geom.band_radius) / 0.45);
        // Pleural band and its echo artifact.
        const double band = std::exp(-std::pow((r - geom.band_radius) / 0.025, 2.0));
        const double echo =
            std::exp(-std::pow((r - 1.55 * geom.band_radius) / 0.03, 2.0));
        base += geom.band_gain * band + geom.echo_gain * echo;
        // Soft lateral shadows near the fan edges (poor transducer contact).
        const double edge = std::abs(a) / geom.fan_half_angle;
        if (edge > 0.82) base *= std::max(0.25, 1.0 - 3.0 * (edge - 0.82));
        // Consolidation analogue: bright elliptical blobs below the band.
        for (const Blob& blob : geom.blobs) {
          const double br = r - blob.cy;
          const double ba = (a - blob.cx) * blob.cy;  // arc length offset
          const double ca = std::cos(blob.angle), sa = std::sin(blob.angle);
          const double e1 = (ca * br + sa * ba) / blob.ry;
          const double e2 = (-sa * br + ca * ba) / blob.rx;
          const double d2 = e1 * e1 + e2 * e2;
          base += blob.gain * std::exp(-d2);
        }
      }
      img(y, x) = static_cast<float>(base);
    }
  }
  // Multiplicative speckle, mild floor so dark regions keep grain.
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    img.data()[i] *= 0.35f + 0.65f * speckle.data()[i];
  }
  return img.cwiseMin(1.0f).cwiseMax(0.0f);
}

DatasetManifest generate_surrogate(const SurrogateSpec& spec,
                                   const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) throw IoError("cannot create surrogate output dir: " + out_dir.string());

  DatasetManifest manifest;
  manifest.split_seed = static_cast<std::int64_t>(spec.seed);
  manifest.source_name = "surrogate";
  manifest.base_dir = out_dir;

  // Deterministic patient-level splits (round robin 3:1:1 by default
  // fractions) and a Bresenham-style positivity pattern inside each split,
  // so every split carries both classes whenever the fraction allows.
  int split_count[3] = {0, 0, 0};
  int split_pos[3] = {0, 0, 0};
  for (int p = 0; p < spec.n_patients; ++p) {
    const double u = (p + 0.5) / spec.n_patients;
    Split split;
    if (u < spec.train_fraction) {
      split = Split::train;
    } else if (u < spec.train_fraction + spec.validation_fraction) {
      split = Split::validation;
    } else {
      split = Split::test;
    }
    const int si = static_cast<int>(split);
    const int idx = split_count[si]++;
    const bool positive =
        static_cast<int>(std::floor((idx + 1) * spec.positive_fraction)) >
        static_cast<int>(std::floor(idx * spec.positive_fraction));
    split_pos[si] += positive;

    char pid[32];
    std::snprintf(pid, sizeof(pid), "P%03d", p);
    PatientRecord patient{pid, split, {}};
    for (int v = 0; v < spec.videos_per_patient; ++v) {
      char vid[48];
      std::snprintf(vid, sizeof(vid), "P%03d_V%02d", p, v);
      VideoRecord video{vid, positive ? VideoLabel::positive : VideoLabel::negative, {}};
      for (int f = 0; f < spec.frames_per_video; ++f) {
        char fid[64];
        std::snprintf(fid, sizeof(fid), "P%03d_V%02d_F%03d", p, v, f);
        const std::string rel = std::string("images/") + fid + ".png";
        MatF img = render_surrogate_frame(spec, p, v, f, positive);
        write_png_gray_f32(out_dir / rel, img);
        video.frames.push_back(FrameRecord{
            fid, rel, positive ? FrameLabel::positive : FrameLabel::negative});
      }
      patient.videos.push_back(std::move(video));
    }
    manifest.patients.push_back(std::move(patient));
  }
  save_manifest(manifest, out_dir / "manifest.jsonl");
  return manifest;
}

}  // namespace synthpipe
