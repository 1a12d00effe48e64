#include "synthpipe/gan/dcgan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "synthpipe/nn/adam.hpp"
#include "synthpipe/nn/losses.hpp"

namespace synthpipe {

void GeneratorSpec::validate() const {
  if (latent_dim <= 0) throw InvalidConfigError("generator: latent_dim must be positive");
  if (base_channels < 2) throw InvalidConfigError("generator: base_channels must be >= 2");
  if (n_upsample_stages < 1 || n_upsample_stages > 8) {
    throw InvalidConfigError("generator: n_upsample_stages out of range");
  }
  if (output_size != (4 << n_upsample_stages)) {
    throw InvalidConfigError("generator: output_size must equal 4 * 2^n_upsample_stages");
  }
}

void DiscriminatorSpec::validate() const {
  if (base_channels < 1) throw InvalidConfigError("discriminator: base_channels must be >= 1");
  if (n_downsample_stages < 1 || n_downsample_stages > 8) {
    throw InvalidConfigError("discriminator: n_downsample_stages out of range");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw InvalidConfigError("discriminator: dropout_rate must be in [0, 1)");
  }
  if (leaky_slope <= 0.0 || leaky_slope >= 1.0) {
    throw InvalidConfigError("discriminator: leaky_slope must be in (0, 1)");
  }
}

void GanTrainingConfig::validate() const {
  if (batch_size < 2) throw InvalidConfigError("gan: batch_size must be >= 2");
  if (!(lr_generator > 0.0) || !(lr_discriminator > 0.0)) {
    throw InvalidConfigError("gan: learning rates must be positive");
  }
  if (epochs < 1) throw InvalidConfigError("gan: epochs must be >= 1");
  if (checkpoint_every < 1) throw InvalidConfigError("gan: checkpoint_every must be >= 1");
  if (eval_sample_count < 2) throw InvalidConfigError("gan: eval_sample_count must be >= 2");
}

GanTrainingConfig gan_config_from_toml(const TomlTable& t) {
  GanTrainingConfig cfg;
  cfg.batch_size = static_cast<int>(t.get_int("training", "batch_size", cfg.batch_size));
  cfg.lr_generator = t.get_double("training", "lr_generator", cfg.lr_generator);
  cfg.lr_discriminator = t.get_double("training", "lr_discriminator", cfg.lr_discriminator);
  cfg.epochs = static_cast<int>(t.get_int("training", "epochs", cfg.epochs));
  cfg.seed = static_cast<std::uint64_t>(t.get_int("training", "seed", 0));
  cfg.checkpoint_every =
      static_cast<int>(t.get_int("training", "checkpoint_every", cfg.checkpoint_every));
  cfg.eval_sample_count =
      static_cast<int>(t.get_int("training", "eval_sample_count", cfg.eval_sample_count));
  cfg.deterministic = t.get_bool("training", "deterministic", cfg.deterministic);
  cfg.adam_beta1 = t.get_double("training", "adam_beta1", cfg.adam_beta1);
  cfg.adam_beta2 = t.get_double("training", "adam_beta2", cfg.adam_beta2);
  cfg.validate();
  return cfg;
}

TomlTable gan_config_to_toml(const GanTrainingConfig& cfg, const GeneratorSpec& g,
                             const DiscriminatorSpec& d, const std::string& train_class) {
  TomlTable t;
  t.set("training", "batch_size", TomlValue{static_cast<std::int64_t>(cfg.batch_size)});
  t.set("training", "lr_generator", TomlValue{cfg.lr_generator});
  t.set("training", "lr_discriminator", TomlValue{cfg.lr_discriminator});
  t.set("training", "epochs", TomlValue{static_cast<std::int64_t>(cfg.epochs)});
  t.set("training", "seed", TomlValue{static_cast<std::int64_t>(cfg.seed)});
  t.set("training", "checkpoint_every",
        TomlValue{static_cast<std::int64_t>(cfg.checkpoint_every)});
  t.set("training", "eval_sample_count",
        TomlValue{static_cast<std::int64_t>(cfg.eval_sample_count)});
  t.set("training", "deterministic", TomlValue{cfg.deterministic});
  t.set("training", "adam_beta1", TomlValue{cfg.adam_beta1});
  t.set("training", "adam_beta2", TomlValue{cfg.adam_beta2});
  t.set("generator", "latent_dim", TomlValue{static_cast<std::int64_t>(g.latent_dim)});
  t.set("generator", "base_channels", TomlValue{static_cast<std::int64_t>(g.base_channels)});
  t.set("generator", "n_upsample_stages",
        TomlValue{static_cast<std::int64_t>(g.n_upsample_stages)});
  t.set("generator", "output_size", TomlValue{static_cast<std::int64_t>(g.output_size)});
  t.set("discriminator", "base_channels",
        TomlValue{static_cast<std::int64_t>(d.base_channels)});
  t.set("discriminator", "n_downsample_stages",
        TomlValue{static_cast<std::int64_t>(d.n_downsample_stages)});
  t.set("discriminator", "dropout_rate", TomlValue{d.dropout_rate});
  t.set("discriminator", "leaky_slope", TomlValue{d.leaky_slope});
  t.set("run", "class", TomlValue{train_class});
  return t;
}

nn::Sequential<float> build_generator(const GeneratorSpec& spec, Rng& rng) {
  spec.validate();
  using namespace nn;
  Sequential<float> net;
  // 1x1 latent map -> 4x4 seed.
  net.emplace<ConvTranspose2d<float>>(spec.latent_dim, spec.base_channels, 4, 1, 0,
                                      Init::dcgan, rng);
  net.emplace<BatchNorm2d<float>>(spec.base_channels);
  net.emplace<ReLU<float>>();
  int ch = spec.base_channels;
  for (int stage = 0; stage < spec.n_upsample_stages; ++stage) {
    const bool last = stage == spec.n_upsample_stages - 1;
    const int out_ch = last ? 1 : std::max(spec.base_channels >> (stage + 1), 8);
    net.emplace<ConvTranspose2d<float>>(ch, out_ch, 4, 2, 1, Init::dcgan, rng);
    if (!last) {
      net.emplace<BatchNorm2d<float>>(out_ch);
      net.emplace<ReLU<float>>();
    } else {
      net.emplace<nn::Tanh<float>>();
    }
    ch = out_ch;
  }
  return net;
}

nn::Sequential<float> build_discriminator(const DiscriminatorSpec& spec, Rng& rng) {
  spec.validate();
  using namespace nn;
  Sequential<float> net;
  int ch = 1;
  for (int stage = 0; stage < spec.n_downsample_stages; ++stage) {
    const int out_ch = std::min(spec.base_channels << stage, 512);
    net.emplace<Conv2d<float>>(ch, out_ch, 4, 2, 1, Init::dcgan, rng);
    if (stage > 0) net.emplace<BatchNorm2d<float>>(out_ch);
    net.emplace<LeakyReLU<float>>(spec.leaky_slope);
    net.emplace<Dropout<float>>(spec.dropout_rate);
    ch = out_ch;
  }
  // Valid 4x4 conv collapses the final map into one logit per image.
  net.emplace<Conv2d<float>>(ch, 1, 4, 1, 0, Init::dcgan, rng);
  return net;
}

void store_network(nn::Sequential<float>& net, const std::string& prefix, TensorBlob& blob) {
  for (const auto& p : net.params()) {
    blob.put(prefix + "." + p.name, p.shape,
             std::vector<float>(p.value, p.value + p.size));
  }
  for (const auto& s : net.state()) {
    blob.put(prefix + "." + s.name, s.shape,
             std::vector<float>(s.value, s.value + s.size));
  }
}

void load_network(nn::Sequential<float>& net, const std::string& prefix,
                  const TensorBlob& blob) {
  for (auto& p : net.params()) {
    const auto& entry = blob.at(prefix + "." + p.name);
    if (static_cast<Eigen::Index>(entry.values.size()) != p.size) {
      throw ShapeError("checkpoint tensor size mismatch for " + p.name);
    }
    std::copy(entry.values.begin(), entry.values.end(), p.value);
  }
  for (auto& s : net.state()) {
    const auto& entry = blob.at(prefix + "." + s.name);
    if (static_cast<Eigen::Index>(entry.values.size()) != s.size) {
      throw ShapeError("checkpoint state size mismatch for " + s.name);
    }
    std::copy(entry.values.begin(), entry.values.end(), s.value);
  }
}

namespace {

nlohmann::json spec_to_json(const GeneratorSpec& g) {
  return {{"latent_dim", g.latent_dim},
          {"base_channels", g.base_channels},
          {"n_upsample_stages", g.n_upsample_stages},
          {"output_size", g.output_size}};
}

nlohmann::json spec_to_json(const DiscriminatorSpec& d) {
  return {{"base_channels", d.base_channels},
          {"n_downsample_stages", d.n_downsample_stages},
          {"dropout_rate", d.dropout_rate},
          {"leaky_slope", d.leaky_slope}};
}

nlohmann::json config_to_json(const GanTrainingConfig& c) {
  return {{"batch_size", c.batch_size},
          {"lr_generator", c.lr_generator},
          {"lr_discriminator", c.lr_discriminator},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"checkpoint_every", c.checkpoint_every},
          {"eval_sample_count", c.eval_sample_count},
          {"deterministic", c.deterministic},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2}};
}

GanCheckpoint snapshot(int epoch, const GeneratorSpec& gspec, const DiscriminatorSpec& dspec,
                       const GanTrainingConfig& cfg, const std::string& train_class,
                       const std::vector<std::string>& patients,
                       nn::Sequential<float>& g, nn::Sequential<float>& d) {
  GanCheckpoint ckpt;
  ckpt.epoch = epoch;
  ckpt.gspec = gspec;
  ckpt.dspec = dspec;
  ckpt.config = cfg;
  ckpt.train_class = train_class;
  ckpt.train_patients = patients;
  store_network(g, "g", ckpt.params);
  store_network(d, "d", ckpt.params);
  ckpt.params.meta["epoch"] = epoch;
  ckpt.params.meta["class"] = train_class;
  ckpt.params.meta["generator"] = spec_to_json(gspec);
  ckpt.params.meta["discriminator"] = spec_to_json(dspec);
  ckpt.params.meta["config"] = config_to_json(cfg);
  ckpt.params.meta["train_patients"] = patients;
  return ckpt;
}

}  // namespace

void save_checkpoint(const GanCheckpoint& ckpt, const std::filesystem::path& path) {
  save_blob(path, ckpt.params);
}

GanCheckpoint load_checkpoint(const std::filesystem::path& path) {
  GanCheckpoint ckpt;
  ckpt.params = load_blob(path);
  const auto& meta = ckpt.params.meta;
  ckpt.epoch = meta.at("epoch").get<int>();
  ckpt.train_class = meta.at("class").get<std::string>();
  const auto& g = meta.at("generator");
  ckpt.gspec = {g.at("latent_dim").get<int>(), g.at("base_channels").get<int>(),
                g.at("n_upsample_stages").get<int>(), g.at("output_size").get<int>()};
  const auto& d = meta.at("discriminator");
  ckpt.dspec = {d.at("base_channels").get<int>(), d.at("n_downsample_stages").get<int>(),
                d.at("dropout_rate").get<double>(), d.at("leaky_slope").get<double>()};
  const auto& c = meta.at("config");
  ckpt.config.batch_size = c.at("batch_size").get<int>();
  ckpt.config.lr_generator = c.at("lr_generator").get<double>();
  ckpt.config.lr_discriminator = c.at("lr_discriminator").get<double>();
  ckpt.config.epochs = c.at("epochs").get<int>();
  ckpt.config.seed = c.at("seed").get<std::uint64_t>();
  ckpt.config.checkpoint_every = c.at("checkpoint_every").get<int>();
  ckpt.config.eval_sample_count = c.at("eval_sample_count").get<int>();
  ckpt.config.deterministic = c.at("deterministic").get<bool>();
  ckpt.config.adam_beta1 = c.at("adam_beta1").get<double>();
  ckpt.config.adam_beta2 = c.at("adam_beta2").get<double>();
  if (meta.contains("train_patients")) {
    ckpt.train_patients = meta.at("train_patients").get<std::vector<std::string>>();
  }
  return ckpt;
}

Tensor4<float> generator_forward(const Mat<float>& z_batch, const GeneratorSpec& spec,
                                 nn::Sequential<float>& generator) {
  if (z_batch.cols() != spec.latent_dim) {
    throw ShapeError("generator_forward: latent vectors must have length latent_dim");
  }
  const int n = static_cast<int>(z_batch.rows());
  Tensor4<float> z(n, spec.latent_dim, 1, 1);
  z.rows() = z_batch;
  Rng rng(0);  // inference path draws nothing
  Tensor4<float> out = generator.forward(std::move(z), nn::Phase::eval, rng);
  if (out.c != 1 || out.h != spec.output_size || out.w != spec.output_size) {
    throw ShapeError("generator_forward: unexpected output shape");
  }
  return out;
}

VecF discriminator_forward(const Tensor4<float>& images, const DiscriminatorSpec& spec,
                           nn::Sequential<float>& discriminator, bool training, Rng& rng) {
  if (images.c != 1 || images.h != spec.input_size() || images.w != spec.input_size()) {
    throw ShapeError("discriminator_forward: expected (N, 1, S, S) input");
  }
  Tensor4<float> logits = discriminator.forward(
      images, training ? nn::Phase::train : nn::Phase::eval, rng);
  VecF probs(logits.n);
  for (int i = 0; i < logits.n; ++i) probs(i) = nn::sigmoid(logits.data(i * logits.sample_size()));
  return probs;
}

GanTrainResult train_gan(const FrameSet& frames, const GeneratorSpec& gspec,
                         const DiscriminatorSpec& dspec, const GanTrainingConfig& cfg,
                         const std::string& train_class, const EpochMonitor& monitor,
                         const std::filesystem::path& run_dir) {
  gspec.validate();
  dspec.validate();
  cfg.validate();
  if (frames.empty()) throw EmptyDatasetError("train_gan: no frames");
  if (frames.norm_mode != NormMode::unit_range) {
    throw InvalidConfigError("train_gan: frames must be normalized in unit_range mode");
  }
  if (gspec.output_size != frames.side || dspec.input_size() != frames.side) {
    throw ShapeError("train_gan: network sizes do not match frame side");
  }

  const std::vector<std::string> patients = frames.patient_ids();

  Rng init_rng = Rng::substream(cfg.seed, {0x6A11u});
  nn::Sequential<float> g = build_generator(gspec, init_rng);
  nn::Sequential<float> d = build_discriminator(dspec, init_rng);
  nn::Adam<float> g_opt(g.params(), cfg.lr_generator, cfg.adam_beta1, cfg.adam_beta2);
  nn::Adam<float> d_opt(d.params(), cfg.lr_discriminator, cfg.adam_beta1, cfg.adam_beta2);

  std::ofstream losses_os;
  if (!run_dir.empty()) {
    std::filesystem::create_directories(run_dir);
    save_toml(run_dir / "config.toml", gan_config_to_toml(cfg, gspec, dspec, train_class));
    nlohmann::json prov;
    prov["train_patients"] = patients;
    prov["train_class"] = train_class;
    prov["frame_count"] = frames.size();
    std::ofstream prov_os(run_dir / "provenance.json");
    prov_os << prov.dump(2) << "\n";
    losses_os.open(run_dir / "losses.jsonl");
  }

  GanTrainResult result;
  const int n_frames = static_cast<int>(frames.size());
  const int side = frames.side;
  long step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng epoch_rng = Rng::substream(cfg.seed, {0xE90Cull, static_cast<std::uint64_t>(epoch)});
    std::vector<int> order(frames.size());
    for (int i = 0; i < n_frames; ++i) order[static_cast<std::size_t>(i)] = i;
    epoch_rng.shuffle(order);

    for (int start = 0; start < n_frames; start += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, n_frames - start);
      Tensor4<float> real(bs, 1, side, side);
      for (int i = 0; i < bs; ++i) {
        real.image(i) = frames.frames[static_cast<std::size_t>(order[start + i])].pixels;
      }
      Mat<float> z(bs, gspec.latent_dim);
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        z.data()[i] = static_cast<float>(epoch_rng.normal());
      }
      Tensor4<float> z_t(bs, gspec.latent_dim, 1, 1);
      z_t.rows() = z;
      Tensor4<float> fake = g.forward(z_t, nn::Phase::train, epoch_rng);

      const VecF ones = VecF::Ones(bs);
      const VecF zeros = VecF::Zero(bs);
      auto logits_of = [](const Tensor4<float>& t) {
        VecF v(t.n);
        for (int i = 0; i < t.n; ++i) v(i) = t.data(i * t.sample_size());
        return v;
      };
      auto grad_tensor = [](const Tensor4<float>& like, const VecF& dl) {
        Tensor4<float> dt(like.n, like.c, like.h, like.w);
        for (int i = 0; i < like.n; ++i) dt.data(i * like.sample_size()) = dl(i);
        return dt;
      };

      // Discriminator step: real batch toward 1, generated batch toward 0.
      d.zero_grad();
      Tensor4<float> d_real = d.forward(real, nn::Phase::train, epoch_rng);
      VecF dl_real;
      const float loss_real = nn::bce_with_logits(logits_of(d_real), ones, dl_real);
      d.backward(grad_tensor(d_real, dl_real));
      Tensor4<float> d_fake = d.forward(fake, nn::Phase::train, epoch_rng);
      VecF dl_fake;
      const float loss_fake = nn::bce_with_logits(logits_of(d_fake), zeros, dl_fake);
      d.backward(grad_tensor(d_fake, dl_fake));
      d_opt.step();

      // Generator step: freshly scored fakes toward 1 (non-saturating).
      g.zero_grad();
      d.zero_grad();
      Tensor4<float> d_fake2 = d.forward(fake, nn::Phase::train, epoch_rng);
      VecF dl_gen;
      const float loss_gen = nn::bce_with_logits(logits_of(d_fake2), ones, dl_gen);
      Tensor4<float> dfake = d.backward(grad_tensor(d_fake2, dl_gen));
      g.backward(dfake);
      g_opt.step();

      const double d_loss = static_cast<double>(loss_real) + static_cast<double>(loss_fake);
      const double g_loss = static_cast<double>(loss_gen);
      if (!std::isfinite(d_loss) || !std::isfinite(g_loss)) {
        throw DivergenceError("non-finite GAN loss at step " + std::to_string(step));
      }
      result.losses.push_back({step, d_loss, g_loss});
      if (losses_os) {
        nlohmann::json row{{"step", step}, {"d_loss", d_loss}, {"g_loss", g_loss}};
        losses_os << row.dump() << "\n";
      }
      ++step;
    }

    GanCheckpoint ckpt = snapshot(epoch, gspec, dspec, cfg, train_class, patients, g, d);
    if (epoch % cfg.checkpoint_every == 0 || epoch == cfg.epochs) {
      if (!run_dir.empty()) {
        save_checkpoint(ckpt, run_dir / ("gan_epoch_" + std::to_string(epoch) + ".ckpt"));
      }
      result.checkpoints.push_back(ckpt);
    }
    if (monitor) monitor(ckpt);
  }
  return result;
}

FrameSet SyntheticImageSet::to_frame_set(ClassLabel label) const {
  FrameSet set;
  set.norm_mode = NormMode::unit_range;
  set.side = images.empty() ? 0 : static_cast<int>(images.front().rows());
  for (std::size_t i = 0; i < images.size(); ++i) {
    PreprocessedFrame f;
    f.pixels = images[i];
    f.frame_id = "synth_" + source_class + "_e" + std::to_string(gan_epoch) + "_" +
                 std::to_string(i);
    f.label = label;
    f.synthetic = true;
    set.add(std::move(f));
  }
  return set;
}

SyntheticImageSet generate_images(const GanCheckpoint& ckpt, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidConfigError("generate_images: count must be >= 1");
  Rng build_rng(0);
  nn::Sequential<float> g = build_generator(ckpt.gspec, build_rng);
  load_network(g, "g", ckpt.params);

  SyntheticImageSet out;
  out.source_class = ckpt.train_class;
  out.gan_epoch = ckpt.epoch;
  out.source_patients = ckpt.train_patients;
  out.images.reserve(static_cast<std::size_t>(count));

  Rng z_rng = Rng::substream(seed, {0x5A3D1ull});
  const int chunk = 64;
  for (int done = 0; done < count; done += chunk) {
    const int bs = std::min(chunk, count - done);
    Mat<float> z(bs, ckpt.gspec.latent_dim);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z.data()[i] = static_cast<float>(z_rng.normal());
    }
    Tensor4<float> imgs = generator_forward(z, ckpt.gspec, g);
    for (int i = 0; i < bs; ++i) out.images.emplace_back(imgs.image(i));
  }
  return out;
}

}  // namespace synthpipe
