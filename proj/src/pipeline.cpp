// src/pipeline.cpp

// Copyright 2026  The avwws Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "avwws/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "avwws/audio.hpp"
#include "avwws/augment.hpp"
#include "avwws/checkpoint.hpp"
#include "avwws/error.hpp"
#include "avwws/eval.hpp"

namespace fs = std::filesystem;

namespace avwws {

namespace {

fs::path out_dir(const CommandOptions& opts) {
  if (opts.out.empty()) throw ConfigError("--out is required");
  const fs::path p(opts.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw InputError("cannot create output directory " + p.string() + ": " + ec.message());
  return p;
}

void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw InputError("cannot create directory " + p.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

Manifest load_manifest(const CommandOptions& opts) {
  if (opts.manifest.empty()) throw ConfigError("--manifest is required");
  return read_manifest(opts.manifest);
}

std::uint64_t seed_of(const CommandOptions& opts) { return opts.seed.value_or(opts.config.get_u64("seed", 1)); }

std::size_t positive(const Config& cfg, const std::string& key, long fallback) {
  const long v = cfg.get_long(key, fallback);
  if (v < 1) throw ConfigError("'" + key + "' must be positive");
  return static_cast<std::size_t>(v);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const std::string& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

SyntheticSpec synthetic_spec_from(const Config& cfg, std::uint64_t seed) {
  SyntheticSpec s;
  s.n_positive = positive(cfg, "n_positive", static_cast<long>(s.n_positive));
  s.n_negative = positive(cfg, "n_negative", static_cast<long>(s.n_negative));
  s.sample_rate = cfg.get_double("sample_rate", s.sample_rate);
  s.min_duration = cfg.get_double("min_duration", s.min_duration);
  s.max_duration = cfg.get_double("max_duration", s.max_duration);
  s.video_dim = positive(cfg, "video_dim", static_cast<long>(s.video_dim));
  s.noise_std = cfg.get_double("noise_std", s.noise_std);
  s.motif_amplitude = cfg.get_double("motif_amplitude", s.motif_amplitude);
  s.dev_fraction = cfg.get_double("dev_fraction", s.dev_fraction);
  s.eval_fraction = cfg.get_double("eval_fraction", s.eval_fraction);
  s.seed = seed;
  s.validate();
  return s;
}

FbankOptions fbank_options_from(const Config& cfg) {
  FbankOptions o;
  o.n_mels = positive(cfg, "n_mels", static_cast<long>(o.n_mels));
  return o;
}

ModelConfig model_config_from(const Config& cfg, std::size_t audio_dim, std::size_t video_dim) {
  const ModelKind kind = parse_model_kind(cfg.get_string("model", "a-transformer"));
  ModelConfig m = ModelConfig::desk(kind, video_dim);
  m.audio.input_dim = audio_dim;
  m.encoder.n_blocks = static_cast<std::size_t>(std::max(0L, cfg.get_long("n_blocks", static_cast<long>(m.encoder.n_blocks))));
  m.encoder.n_heads = positive(cfg, "n_heads", static_cast<long>(m.encoder.n_heads));
  m.encoder.hidden = positive(cfg, "hidden", static_cast<long>(m.encoder.hidden));
  m.encoder.ffn = positive(cfg, "ffn", static_cast<long>(m.encoder.ffn));
  m.encoder.conv_kernel = positive(cfg, "conv_kernel", static_cast<long>(m.encoder.conv_kernel));
  m.audio.hidden = m.video.hidden = m.encoder.hidden;
  const std::size_t channels = positive(cfg, "conv_channels", static_cast<long>(m.audio.conv1.channels));
  m.audio.conv1.channels = m.audio.conv2.channels = channels;
  m.video.conv1.channels = m.video.conv2.channels = channels;
  m.fusion.site = parse_fusion_site(cfg.get_string("fusion_site", to_string(m.fusion.site)));
  m.fusion.op = parse_fusion_operator(cfg.get_string("fusion_operator", to_string(m.fusion.op)));
  m.fusion.w_a = cfg.get_double("w_a", m.fusion.w_a);
  m.fusion.w_v = cfg.get_double("w_v", m.fusion.w_v);
  m.train_fusion_weights = cfg.get_bool("train_fusion_weights", m.train_fusion_weights);
  m.max_positions = positive(cfg, "max_positions", static_cast<long>(m.max_positions));
  m.validate();
  return m;
}

Config model_config_to_config(const ModelConfig& m) {
  Config c;
  c.set("model", to_string(m.kind));
  c.set("audio_dim", std::to_string(m.audio.input_dim));
  c.set("video_dim", std::to_string(m.video.input_dim));
  c.set("n_blocks", std::to_string(m.encoder.n_blocks));
  c.set("n_heads", std::to_string(m.encoder.n_heads));
  c.set("hidden", std::to_string(m.encoder.hidden));
  c.set("ffn", std::to_string(m.encoder.ffn));
  c.set("conv_kernel", std::to_string(m.encoder.conv_kernel));
  c.set("conv_channels", std::to_string(m.audio.conv1.channels));
  c.set("fusion_site", to_string(m.fusion.site));
  c.set("fusion_operator", to_string(m.fusion.op));
  c.set("w_a", format_double(m.fusion.w_a));
  c.set("w_v", format_double(m.fusion.w_v));
  c.set("train_fusion_weights", m.train_fusion_weights ? "true" : "false");
  c.set("max_positions", std::to_string(m.max_positions));
  return c;
}

std::pair<TrainConfig, TrainConfig> train_configs_from(const Config& cfg, std::uint64_t seed) {
  TrainConfig s1;
  s1.loss = LossKind::ce;
  s1.seed = seed;
  s1.lr_peak = cfg.get_double("lr_peak", s1.lr_peak);
  s1.warmup_steps = cfg.get_long("warmup_steps", s1.warmup_steps);
  s1.batch_size = positive(cfg, "batch_size", static_cast<long>(s1.batch_size));
  s1.max_steps = cfg.get_long("stage1_steps", s1.max_steps);
  s1.spec_augment = cfg.get_bool("spec_augment", false);
  TrainConfig s2 = s1;
  s2.loss = LossKind::focal;
  s2.max_steps = cfg.get_long("stage2_steps", 100);
  s2.lr_peak = cfg.get_double("stage2_lr_peak", s1.lr_peak);
  s2.warmup_steps = cfg.get_long("stage2_warmup_steps", s1.warmup_steps);
  s2.focal_gamma = cfg.get_double("focal_gamma", s2.focal_gamma);
  s2.focal_alpha = cfg.get_double("focal_alpha", s2.focal_alpha);
  s1.validate();
  s2.validate();
  return {s1, s2};
}

std::vector<Example> load_examples(const std::vector<ManifestRecord>& records, bool need_video) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const ManifestRecord& r : records) {
    if (r.features.empty()) throw InputError("record " + r.id + " has no features (run featurize first)");
    Example ex;
    ex.id = r.id;
    ex.label = r.label;
    ex.audio = read_features(r.features);
    if (ex.audio.kind != FeatureKind::audio) throw InputError(r.features + " does not hold audio features");
    if (need_video) {
      if (r.video.empty()) throw ConfigError("the AV model needs video features; record " + r.id + " has none");
      ex.video = load_video_features(r.video);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

// ---------------------------------------------------------------------------

void run_gen_data(const CommandOptions& opts) {
  const SyntheticSpec spec = synthetic_spec_from(opts.config, seed_of(opts));
  const fs::path out = out_dir(opts);
  make_dir(out / "audio");
  make_dir(out / "video");
  Manifest m;
  auto emit = [&](ClipKind kind, std::size_t index, std::size_t count, const char* prefix) {
    const SyntheticClip clip = synthesize_clip(spec, kind, index);
    char id[32];
    std::snprintf(id, sizeof id, "%s%04zu", prefix, index);
    const auto n_eval = static_cast<std::size_t>(std::lround(spec.eval_fraction * static_cast<double>(count)));
    const auto n_dev = static_cast<std::size_t>(std::lround(spec.dev_fraction * static_cast<double>(count)));
    ManifestRecord r;
    r.id = id;
    r.label = clip.label;
    r.split = index + n_eval >= count ? "eval" : index + n_eval + n_dev >= count ? "dev" : "train";
    r.audio = fs::absolute(out / "audio" / (r.id + ".wav")).lexically_normal().string();
    r.video = fs::absolute(out / "video" / (r.id + ".avwf")).lexically_normal().string();
    write_wav(r.audio, clip.audio, WavEncoding::float32);
    write_features(r.video, clip.video);
    m.records.push_back(std::move(r));
  };
  for (std::size_t i = 0; i < spec.n_positive; ++i) emit(ClipKind::wake, i, spec.n_positive, "pos");
  for (std::size_t i = 0; i < spec.n_negative; ++i) emit(negative_kind(i), i, spec.n_negative, "neg");
  write_manifest((out / "manifest.tsv").string(), m);
  std::cout << "gen-data: " << m.records.size() << " clips -> " << (out / "manifest.tsv").string() << '\n';
}

void run_featurize(const CommandOptions& opts) {
  Manifest m = load_manifest(opts);
  const FbankOptions fb = fbank_options_from(opts.config);
  const fs::path out = out_dir(opts);
  make_dir(out / "features");

  const std::size_t n = m.records.size();
  std::vector<FeatureMatrix> raw(n);
  std::vector<std::string> problems(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ManifestRecord& r = m.records[i];
    try {
      if (r.audio.empty()) throw InputError("no audio path");
      Waveform w = read_wav(r.audio);
      if (w.num_channels() > 1) w = Waveform::mono(w.channels[0], w.sample_rate);
      raw[i] = compute_fbank(w, fb);
    } catch (const Error& e) {
      problems[i] = e.what();
    }
  }
  std::size_t failed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!problems[i].empty()) {
      std::cerr << "featurize: " << m.records[i].id << ": " << problems[i] << '\n';
      ++failed;
    }
  }
  if (failed) throw InputError(std::to_string(failed) + " of " + std::to_string(n) + " records could not be featurized");

  std::vector<FeatureMatrix> train;
  for (std::size_t i = 0; i < n; ++i) {
    if (m.records[i].split == "train") train.push_back(raw[i]);
  }
  if (train.empty()) throw InputError("manifest has no train records to estimate CMVN statistics from");
  const CmvnStats stats = compute_cmvn_stats(train);
  const std::size_t d = stats.mean.size();
  write_checkpoint((out / "cmvn.avck").string(), {{"cmvn.mean", {d}, stats.mean},
                                                  {"cmvn.variance", {d}, stats.variance},
                                                  {"cmvn.frames", {1}, {static_cast<double>(stats.frame_count)}}});
  for (std::size_t i = 0; i < n; ++i) {
    ManifestRecord& r = m.records[i];
    r.features = fs::absolute(out / "features" / (r.id + ".avwf")).lexically_normal().string();
    write_features(r.features, apply_cmvn(raw[i], stats));
  }
  write_manifest((out / "manifest.tsv").string(), m);
  std::cout << "featurize: " << n << " records, " << stats.frame_count << " train frames for CMVN\n";
}

// ---------------------------------------------------------------------------
// augment

const std::vector<std::string>& augment_step_names() {
  static const std::vector<std::string> names = {"speed", "reverb", "wpe", "beamform", "noise", "normalize"};
  return names;
}

namespace {

const std::vector<std::string> kChainKeys = {"chain",        "speed_ratios", "room",      "rt60_min",       "rt60_max",
                                             "n_mics",       "mic_spacing",  "reflection_order", "wpe_taps", "wpe_delay",
                                             "wpe_iterations", "snr_min",    "snr_max",   "noise_wav",      "clip_seconds"};

std::vector<std::string> chain_steps(const Config& cfg) {
  std::vector<std::string> steps = cfg.get_list("chain");
  const auto& valid = augment_step_names();
  for (const std::string& s : steps) {
    if (std::find(valid.begin(), valid.end(), s) == valid.end()) {
      throw ConfigError("unknown augmentation step '" + s + "' (valid steps: " + join(valid) + ")");
    }
  }
  return steps;
}

struct ChainSignal {
  Waveform audio;
  std::vector<Vec3> mics;
  double steer_deg = 90.0;
};

std::mt19937_64 record_rng(std::uint64_t seed, std::size_t record, std::size_t fork, std::size_t step) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(record), static_cast<std::uint32_t>(fork),
                    static_cast<std::uint32_t>(step)};
  return std::mt19937_64(seq);
}

void apply_step(const std::string& step, const Config& cfg, ChainSignal& s, std::mt19937_64& rng,
                const Waveform* noise_source) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (step == "reverb") {
    std::vector<double> dims = cfg.get_doubles("room");
    if (dims.empty()) dims = {6.0, 5.0, 3.0};
    if (dims.size() != 3) throw ConfigError("'room' needs three dimensions");
    RoomSpec room;
    room.dimensions = {dims[0], dims[1], dims[2]};
    const double lo = cfg.get_double("rt60_min", 0.2), hi = cfg.get_double("rt60_max", 0.6);
    room.rt60 = lo + (hi - lo) * unit(rng);
    room.max_reflection_order = static_cast<int>(cfg.get_long("reflection_order", 6));
    const std::size_t n_mics = positive(cfg, "n_mics", 4);
    const double spacing = cfg.get_double("mic_spacing", 0.05);
    const Vec3 center{dims[0] / 2.0, dims[1] / 2.0, std::min(1.2, dims[2] / 2.0)};
    for (std::size_t k = 0; k < n_mics; ++k) {
      const double off = (static_cast<double>(k) - (static_cast<double>(n_mics) - 1.0) / 2.0) * spacing;
      room.mics.push_back({center[0] + off, center[1], center[2]});
    }
    const double margin = 0.3;
    for (int tries = 0;; ++tries) {
      for (int a = 0; a < 3; ++a) room.source[a] = margin + (dims[a] - 2.0 * margin) * unit(rng);
      room.source[2] = center[2];
      const double dx = room.source[0] - center[0], dy = room.source[1] - center[1];
      if (std::hypot(dx, dy) >= 1.0 || tries > 100) break;
    }
    const Waveform rir = simulate_rir(room, s.audio.sample_rate);
    const Waveform mono = s.audio.num_channels() > 1 ? Waveform::mono(s.audio.channels[0], s.audio.sample_rate) : s.audio;
    Waveform wet = convolve_rir(mono, rir);
    for (auto& ch : wet.channels) ch.resize(mono.num_samples());
    s.audio = std::move(wet);
    s.mics = room.mics;
    s.steer_deg = std::atan2(room.source[1] - center[1], room.source[0] - center[0]) * 180.0 / std::numbers::pi;
  } else if (step == "wpe") {
    WpeOptions w;
    w.taps = positive(cfg, "wpe_taps", static_cast<long>(w.taps));
    w.delay = positive(cfg, "wpe_delay", static_cast<long>(w.delay));
    w.iterations = static_cast<std::size_t>(std::max(0L, cfg.get_long("wpe_iterations", static_cast<long>(w.iterations))));
    s.audio = wpe_dereverb(s.audio, w);
  } else if (step == "beamform") {
    if (s.audio.num_channels() > 1) {
      s.audio = delay_and_sum_beamform(s.audio, s.mics, s.steer_deg);
      s.mics.clear();
    }
  } else if (step == "noise") {
    const double lo = cfg.get_double("snr_min", 0.0), hi = cfg.get_double("snr_max", 20.0);
    const double snr = lo + (hi - lo) * unit(rng);
    Waveform noise;
    if (noise_source) {
      noise = *noise_source;
    } else {
      std::normal_distribution<double> g(0.0, 1.0);
      std::vector<double> v(s.audio.num_samples());
      for (double& x : v) x = g(rng);
      noise = Waveform::mono(std::move(v), s.audio.sample_rate);
    }
    Waveform out;
    out.sample_rate = s.audio.sample_rate;
    for (const auto& ch : s.audio.channels) {
      auto local = rng;
      out.channels.push_back(mix_noise(Waveform::mono(ch, s.audio.sample_rate), noise, snr, local).channels[0]);
    }
    rng.discard(1);
    s.audio = std::move(out);
  } else if (step == "normalize") {
    const double seconds = cfg.get_double("clip_seconds", 1.5);
    if (!(seconds > 0.0)) throw ConfigError("'clip_seconds' must be positive");
    s.audio = clip_length(s.audio, static_cast<std::size_t>(std::lround(seconds * s.audio.sample_rate)), rng);
  }
}

}  // namespace

std::string chain_fingerprint(const Config& cfg, std::uint64_t seed) {
  std::string canon = "seed=" + std::to_string(seed);
  for (const std::string& s : chain_steps(cfg)) canon += ";step=" + s;
  for (const std::string& k : kChainKeys) {
    if (k != "chain" && cfg.has(k)) canon += ";" + k + "=" + cfg.get_string(k, "");
  }
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%08llx", static_cast<unsigned long long>(h & 0xffffffffULL));
  return buf;
}

void run_augment(const CommandOptions& opts) {
  const Manifest in = load_manifest(opts);
  const Config& cfg = opts.config;
  const std::vector<std::string> steps = chain_steps(cfg);
  const std::uint64_t seed = seed_of(opts);
  const fs::path out = out_dir(opts);
  Manifest result = in;
  if (steps.empty()) {
    write_manifest((out / "manifest.tsv").string(), result);
    std::cout << "augment: empty chain, " << in.records.size() << " records copied\n";
    return;
  }
  make_dir(out / "audio");
  const std::string fp = chain_fingerprint(cfg, seed);
  std::vector<double> ratios = {1.0};
  const bool forks = std::find(steps.begin(), steps.end(), "speed") != steps.end();
  if (forks) {
    ratios = cfg.get_doubles("speed_ratios");
    if (ratios.empty()) ratios = {0.9, 1.1};
  }
  std::optional<Waveform> noise_source;
  if (cfg.has("noise_wav")) noise_source = read_wav(cfg.get_string("noise_wav", ""));

  for (std::size_t i = 0; i < in.records.size(); ++i) {
    const ManifestRecord& r = in.records[i];
    if (r.split != "train") continue;
    if (r.audio.empty()) throw InputError("record " + r.id + " has no audio");
    const Waveform source = read_wav(r.audio);
    for (std::size_t f = 0; f < ratios.size(); ++f) {
      ChainSignal s{source, {}, 90.0};
      for (std::size_t k = 0; k < steps.size(); ++k) {
        auto rng = record_rng(seed, i, f, k);
        if (steps[k] == "speed") {
          s.audio.channels = speed_perturb(s.audio, ratios[f]).channels;
        } else {
          apply_step(steps[k], cfg, s, rng, noise_source ? &*noise_source : nullptr);
        }
      }
      ManifestRecord copy = r;
      copy.id = r.id + "-aug" + fp + (forks ? "-s" + std::to_string(f) : "");
      copy.features.clear();
      copy.audio = fs::absolute(out / "audio" / (copy.id + ".wav")).lexically_normal().string();
      write_wav(copy.audio, s.audio, WavEncoding::float32);
      result.records.push_back(std::move(copy));
    }
  }
  write_manifest((out / "manifest.tsv").string(), result);
  std::cout << "augment: chain " << join(steps) << " (" << fp << "), " << result.records.size() - in.records.size()
            << " augmented records\n";
}

// ---------------------------------------------------------------------------
// train / eval / vote

WakeWordModel load_model(const std::string& checkpoint_path) {
  const fs::path cfg_path = fs::path(checkpoint_path).replace_extension(".cfg");
  if (!fs::exists(cfg_path)) throw InputError("model configuration " + cfg_path.string() + " not found");
  const Config cfg = Config::load(cfg_path.string());
  WakeWordModel model(model_config_from(cfg, positive(cfg, "audio_dim", 63), positive(cfg, "video_dim", 16)), 0);
  load_named_arrays(model.params(), read_checkpoint(checkpoint_path));
  return model;
}

void run_train(const CommandOptions& opts) {
  const Manifest m = load_manifest(opts);
  const Config& cfg = opts.config;
  const std::uint64_t seed = seed_of(opts);
  const fs::path out = out_dir(opts);
  const ModelKind kind = parse_model_kind(cfg.get_string("model", "a-transformer"));
  const bool need_video = kind == ModelKind::av_transformer;
  const std::string split = cfg.get_string("train_split", "train");
  const std::vector<ManifestRecord> records = m.split(split);
  if (records.empty()) throw InputError("manifest has no '" + split + "' records");
  if (need_video) {
    for (const ManifestRecord& r : records) {
      if (r.video.empty()) throw ConfigError("av-transformer needs video features; record " + r.id + " has none");
    }
  }
  const std::vector<Example> data = load_examples(records, need_video);
  const std::size_t video_dim = need_video ? data[0].video->cols : positive(cfg, "video_dim", 16);
  WakeWordModel model(model_config_from(cfg, data[0].audio.cols, video_dim), seed);
  const auto [stage1, stage2] = train_configs_from(cfg, seed);

  const fs::path state_path = out / "train_state.avck";
  TrainState state;
  if (opts.resume && fs::exists(state_path)) {
    state = decode_train_state(model, read_checkpoint(state_path.string()));
    std::clog << "train: resuming at stage " << state.stage << " step " << state.step << '\n';
  }
  TrainOptions topts;
  topts.step_budget = opts.stop_after;
  const long log_every = cfg.get_long("log_every", 100);
  topts.on_step = [log_every](const HistoryRecord& r) {
    if (log_every > 0 && r.step % log_every == 0) {
      std::clog << "stage " << r.stage << " step " << r.step << " loss " << r.loss << " lr " << r.lr << '\n';
    }
  };
  const bool done = two_stage_train(model, data, stage1, stage2, state, topts);

  write_checkpoint(state_path.string(), encode_train_state(model, state));
  std::ostringstream hist;
  write_history(hist, state.history);
  write_text(out / "history.txt", hist.str());
  write_text(out / "model.cfg", model_config_to_config(model.config()).to_text());
  if (done) write_checkpoint((out / "model.avck").string(), to_named_arrays(model.params()));
  const double last = state.history.empty() ? 0.0 : state.history.back().loss;
  std::cout << "train: " << (done ? "finished" : "stopped") << " at stage " << state.stage << " step " << state.step
            << ", loss " << last << '\n';
}

namespace {

std::string metrics_line(const std::string& name, const std::string& threshold, const Metrics& m) {
  std::ostringstream os;
  os.precision(6);
  os << name << '\t' << threshold << '\t' << m.frr << '\t' << m.far << '\t' << m.score << '\n';
  return os.str();
}

constexpr const char* kMetricsHeader = "#name\tthreshold\tfrr\tfar\tscore\n";

std::vector<double> thresholds_for(const Config& cfg, std::size_t n) {
  std::vector<double> t = cfg.get_doubles("thresholds");
  if (t.empty()) t = {0.5};
  if (t.size() == 1) t.assign(n, t[0]);
  if (t.size() != n) {
    throw ConfigError("'thresholds' lists " + std::to_string(t.size()) + " values for " + std::to_string(n) + " models");
  }
  return t;
}

}  // namespace

void run_eval(const CommandOptions& opts) {
  const Manifest m = load_manifest(opts);
  const Config& cfg = opts.config;
  const std::vector<std::string> ckpts = cfg.get_list("checkpoints");
  if (ckpts.empty()) throw ConfigError("'checkpoints' must list at least one model checkpoint");
  const fs::path out = out_dir(opts);
  const std::string split = cfg.get_string("split", "eval");
  const std::vector<ManifestRecord> records = m.split(split);
  if (records.empty()) throw InputError("manifest has no '" + split + "' records");
  const bool sweep = cfg.get_bool("sweep", false);
  const std::string sweep_split = cfg.get_string("sweep_split", "dev");
  std::vector<double> thresholds = sweep ? std::vector<double>(ckpts.size(), 0.5) : thresholds_for(cfg, ckpts.size());

  std::vector<LabelRecord> labels;
  std::vector<int> y;
  for (const ManifestRecord& r : records) {
    labels.push_back({r.id, r.label});
    y.push_back(r.label);
  }
  write_labels((out / "labels.txt").string(), labels);

  std::string report = kMetricsHeader;
  std::vector<std::vector<ScoreRecord>> lists;
  for (std::size_t k = 0; k < ckpts.size(); ++k) {
    const WakeWordModel model = load_model(ckpts[k]);
    const bool need_video = model.config().uses_video();
    if (sweep) {
      const std::vector<ManifestRecord> dev = m.split(sweep_split);
      if (dev.empty()) throw InputError("threshold sweep needs '" + sweep_split + "' records");
      const std::vector<Example> dev_data = load_examples(dev, need_video);
      const std::vector<double> dev_scores = predict_all(model, dev_data);
      std::vector<int> dev_y;
      for (const Example& ex : dev_data) dev_y.push_back(ex.label);
      const std::vector<double> grid = default_threshold_grid();
      thresholds[k] = threshold_sweep(dev_scores, dev_y, grid).best_point().threshold;
    }
    const std::vector<Example> data = load_examples(records, need_video);
    const std::vector<double> scores = predict_all(model, data);
    std::vector<ScoreRecord> list;
    for (std::size_t i = 0; i < data.size(); ++i) list.push_back({data[i].id, scores[i]});
    write_scores((out / ("scores_" + std::to_string(k + 1) + ".txt")).string(), list);
    report += metrics_line("model" + std::to_string(k + 1), format_double(thresholds[k]),
                           metrics(confusion_counts(scores, y, thresholds[k])));
    lists.push_back(std::move(list));
  }
  if (lists.size() == 3) report += metrics_line("ensemble", "-", ensemble_eval(lists, thresholds, labels));
  write_text(out / "metrics.txt", report);
  std::cout << report;
}

void run_vote(const CommandOptions& opts) {
  const Config& cfg = opts.config;
  const std::vector<std::string> files = cfg.get_list("scores");
  if (files.size() != 3) throw ConfigError("'scores' must list exactly three score files");
  std::vector<LabelRecord> labels;
  if (cfg.has("labels")) {
    labels = read_labels(cfg.get_string("labels", ""));
  } else if (!opts.manifest.empty()) {
    for (const ManifestRecord& r : read_manifest(opts.manifest).split(cfg.get_string("split", "eval"))) {
      labels.push_back({r.id, r.label});
    }
  } else {
    throw ConfigError("vote needs a 'labels' file or --manifest");
  }
  const std::vector<double> thresholds = thresholds_for(cfg, 3);
  std::vector<std::vector<ScoreRecord>> lists;
  for (const std::string& f : files) lists.push_back(read_scores(f));
  const fs::path out = out_dir(opts);
  const std::vector<int> votes = ensemble_decisions(lists, thresholds, labels);
  std::vector<LabelRecord> decided;
  for (std::size_t i = 0; i < labels.size(); ++i) decided.push_back({labels[i].id, votes[i]});
  write_labels((out / "votes.txt").string(), decided);

  std::vector<int> y;
  for (const LabelRecord& l : labels) y.push_back(l.label);
  std::string report = kMetricsHeader;
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> s;
    for (const ScoreRecord& r : lists[k]) s.push_back(r.score);
    report += metrics_line("model" + std::to_string(k + 1), format_double(thresholds[k]),
                           metrics(confusion_counts(s, y, thresholds[k])));
  }
  report += metrics_line("ensemble", "-", ensemble_eval(lists, thresholds, labels));
  write_text(out / "metrics.txt", report);
  std::cout << report;
}

}  // namespace avwws
