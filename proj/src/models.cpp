// src/models.cpp

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

#include "avwws/models.hpp"

#include <cmath>

#include "avwws/error.hpp"
#include "avwws/ops.hpp"

namespace avwws {

namespace {

std::vector<double> normal_values(std::size_t n, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

std::size_t conv_out(std::size_t in, std::size_t kernel, std::size_t stride) {
  return in < kernel ? 0 : (in - kernel) / stride + 1;
}

}  // namespace

std::size_t ConvFrontendConfig::output_frames(std::size_t frames) const {
  const std::size_t t1 = conv_out(frames, conv1.kernel_t, conv1.stride_t);
  return t1 == 0 ? 0 : conv_out(t1, conv2.kernel_t, conv2.stride_t);
}

std::size_t ConvFrontendConfig::min_input_frames() const {
  // Smallest T with at least one frame after both convolutions.
  const std::size_t t1 = conv2.kernel_t;
  return (t1 - 1) * conv1.stride_t + conv1.kernel_t;
}

std::size_t ConvFrontendConfig::flattened_width() const {
  const std::size_t f1 = conv_out(input_dim, conv1.kernel_f, conv1.stride_f);
  const std::size_t f2 = conv_out(f1, conv2.kernel_f, conv2.stride_f);
  return f2 * conv2.channels;
}

void EncoderConfig::validate() const {
  if (hidden == 0 || n_heads == 0 || hidden % n_heads != 0) {
    throw ConfigError("encoder hidden size " + std::to_string(hidden) + " is not divisible by " +
                      std::to_string(n_heads) + " heads");
  }
  if (ffn == 0) throw ConfigError("encoder FFN width must be positive");
  if (kind == EncoderKind::conformer && conv_kernel % 2 == 0) {
    throw ConfigError("conformer convolution kernel must be odd");
  }
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::a_transformer: return "a-transformer";
    case ModelKind::a_conformer: return "a-conformer";
    case ModelKind::av_transformer: return "av-transformer";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "a-transformer") return ModelKind::a_transformer;
  if (s == "a-conformer") return ModelKind::a_conformer;
  if (s == "av-transformer") return ModelKind::av_transformer;
  throw ConfigError("unknown model kind '" + s + "' (expected a-transformer, a-conformer or av-transformer)");
}

std::string to_string(FusionSite site) { return site == FusionSite::conv ? "conv" : "attention"; }

FusionSite parse_fusion_site(const std::string& s) {
  if (s == "conv") return FusionSite::conv;
  if (s == "attention") return FusionSite::attention;
  throw ConfigError("unknown fusion site '" + s + "' (expected conv or attention)");
}

std::string to_string(FusionOperator op) { return op == FusionOperator::weighted_sum ? "weighted_sum" : "product"; }

FusionOperator parse_fusion_operator(const std::string& s) {
  if (s == "weighted_sum") return FusionOperator::weighted_sum;
  if (s == "product") return FusionOperator::product;
  throw ConfigError("unknown fusion operator '" + s + "' (expected weighted_sum or product)");
}

ModelConfig ModelConfig::desk(ModelKind kind, std::size_t video_dim) {
  ModelConfig cfg;
  cfg.kind = kind;
  cfg.encoder = {2, 4, 64, 256, kind == ModelKind::a_conformer ? EncoderKind::conformer : EncoderKind::transformer, 15};
  cfg.audio.input_dim = 63;
  cfg.audio.conv1 = {3, 3, 2, 2, 8};
  cfg.audio.conv2 = {3, 3, 2, 2, 8};
  cfg.audio.hidden = cfg.encoder.hidden;
  // 40 ms video frames already match the audio frontend's output rate.
  cfg.video.input_dim = video_dim;
  cfg.video.conv1 = {3, 3, 1, 1, 8};
  cfg.video.conv2 = {3, 3, 1, 1, 8};
  cfg.video.hidden = cfg.encoder.hidden;
  return cfg;
}

ModelConfig ModelConfig::full_scale(ModelKind kind, std::size_t video_dim) {
  ModelConfig cfg = desk(kind, video_dim);
  cfg.encoder.n_blocks = 4;
  cfg.encoder.n_heads = 8;
  cfg.encoder.hidden = 512;
  cfg.encoder.ffn = 2048;
  cfg.audio.conv1.channels = cfg.audio.conv2.channels = 32;
  cfg.video.conv1.channels = cfg.video.conv2.channels = 32;
  cfg.audio.hidden = cfg.video.hidden = 512;
  return cfg;
}

void ModelConfig::validate() const {
  encoder.validate();
  if (audio.hidden != encoder.hidden) throw ConfigError("audio frontend width must equal encoder hidden size");
  if (audio.flattened_width() == 0) throw ConfigError("audio feature dimension too small for the frontend kernels");
  if (kind == ModelKind::a_conformer && encoder.kind != EncoderKind::conformer) {
    throw ConfigError("a-conformer requires a conformer encoder");
  }
  if (kind != ModelKind::a_conformer && encoder.kind != EncoderKind::transformer) {
    throw ConfigError(to_string(kind) + " requires a transformer encoder");
  }
  if (uses_video()) {
    if (video.hidden != encoder.hidden) throw ConfigError("video frontend width must equal encoder hidden size");
    if (video.flattened_width() == 0) throw ConfigError("video feature dimension too small for the frontend kernels");
  }
  if (max_positions < 2) throw ConfigError("max_positions must be at least 2");
}

std::size_t expected_parameter_count(const ModelConfig& cfg) {
  auto frontend = [](const ConvFrontendConfig& c) {
    const std::size_t conv1 = c.conv1.kernel_t * c.conv1.kernel_f * 1 * c.conv1.channels + c.conv1.channels;
    const std::size_t conv2 =
        c.conv2.kernel_t * c.conv2.kernel_f * c.conv1.channels * c.conv2.channels + c.conv2.channels;
    const std::size_t dense = c.flattened_width() * c.hidden + c.hidden;
    return conv1 + conv2 + dense;
  };
  const std::size_t h = cfg.encoder.hidden, f = cfg.encoder.ffn;
  const std::size_t norm = 2 * h;
  const std::size_t ffn = norm + (h * f + f) + (f * h + h);
  const std::size_t attn = norm + 4 * (h * h + h);
  std::size_t block = 0;
  if (cfg.encoder.kind == EncoderKind::transformer) {
    block = attn + ffn;
  } else {
    const std::size_t conv = norm + (h * 2 * h + 2 * h) + (cfg.encoder.conv_kernel * h + h) + (h * h + h);
    block = 2 * ffn + attn + conv + norm;
  }
  const std::size_t encoder = cfg.encoder.n_blocks * block;
  const std::size_t token = h;
  const std::size_t head = h + 1;
  std::size_t total = frontend(cfg.audio) + encoder + token + head;
  if (cfg.uses_video()) {
    total += frontend(cfg.video) + 2;
    if (cfg.fusion.site == FusionSite::attention) total += encoder + token;
  }
  return total;
}

// ---------------------------------------------------------------------------

Tensor prepend_class_token(const Tensor& x, const Tensor& token) {
  if (x.rank() != 2 || token.size() != x.dim(1)) {
    throw DimensionError("class token " + to_string(token.shape()) + " does not match sequence " +
                         to_string(x.shape()));
  }
  return ops::concat_rows({ops::reshape(token, {1, token.size()}), x});
}

std::vector<double> positional_table(std::size_t length, std::size_t width) {
  std::vector<double> table(length * width);
  for (std::size_t p = 0; p < length; ++p) {
    for (std::size_t i = 0; i < width; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(width));
      table[p * width + i] = std::sin(static_cast<double>(p) * freq);
      if (i + 1 < width) table[p * width + i + 1] = std::cos(static_cast<double>(p) * freq);
    }
  }
  return table;
}

Tensor add_positional_embedding(const Tensor& x, std::size_t max_positions) {
  if (x.rank() != 2) throw DimensionError("positional embedding expects [T x D], got " + to_string(x.shape()));
  const std::size_t t = x.dim(0), d = x.dim(1);
  if (t > max_positions) {
    throw InputError("sequence of " + std::to_string(t) + " positions exceeds the maximum " +
                     std::to_string(max_positions));
  }
  return ops::add(x, Tensor::constant({t, d}, positional_table(t, d)));
}

Tensor fuse(const Tensor& y_a, const Tensor& y_v, FusionOperator op, const Tensor& w_a, const Tensor& w_v) {
  if (y_a.shape() != y_v.shape()) {
    throw DimensionError("fusion inputs differ in shape: " + to_string(y_a.shape()) + " vs " +
                         to_string(y_v.shape()));
  }
  if (op == FusionOperator::product) return ops::mul(y_a, y_v);
  return ops::add(ops::scale_by(y_a, w_a), ops::scale_by(y_v, w_v));
}

Tensor classify_head(const Tensor& seq, const Tensor& w, const Tensor& b) {
  const std::size_t d = seq.dim(1);
  Tensor cls = seq.dim(0) == 1 ? seq : ops::slice_rows(seq, 0, 1);
  return ops::reshape(ops::sigmoid(ops::linear(cls, ops::reshape(w, {d, 1}), b)), {1});
}

Tensor resample_frames(const Tensor& x, std::size_t frames) {
  const std::size_t t = x.dim(0);
  if (t == frames) return x;
  std::vector<std::size_t> index(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const double pos = (static_cast<double>(i) + 0.5) * static_cast<double>(t) / static_cast<double>(frames);
    index[i] = std::min(t - 1, static_cast<std::size_t>(pos));
  }
  return ops::gather_rows(x, index);
}

Tensor to_tensor(const FeatureMatrix& f) {
  f.validate();
  return Tensor::constant({f.rows, f.cols}, f.data);
}

// ---------------------------------------------------------------------------

ConvFrontend::ConvFrontend(ParameterSet& params, const std::string& prefix, const ConvFrontendConfig& cfg,
                           std::mt19937_64& rng)
    : cfg_(cfg) {
  const auto& c1 = cfg.conv1;
  const auto& c2 = cfg.conv2;
  const std::size_t fan1 = c1.kernel_t * c1.kernel_f;
  conv1_w_ = params.add(prefix + ".conv1.weight", {c1.kernel_t, c1.kernel_f, 1, c1.channels},
                        normal_values(fan1 * c1.channels, std::sqrt(2.0 / static_cast<double>(fan1)), rng));
  conv1_b_ = params.add(prefix + ".conv1.bias", {c1.channels}, std::vector<double>(c1.channels, 0.0));
  const std::size_t fan2 = c2.kernel_t * c2.kernel_f * c1.channels;
  conv2_w_ = params.add(prefix + ".conv2.weight", {c2.kernel_t, c2.kernel_f, c1.channels, c2.channels},
                        normal_values(fan2 * c2.channels, std::sqrt(2.0 / static_cast<double>(fan2)), rng));
  conv2_b_ = params.add(prefix + ".conv2.bias", {c2.channels}, std::vector<double>(c2.channels, 0.0));
  const std::size_t flat = cfg.flattened_width();
  if (flat == 0) throw ConfigError(prefix + ": feature dimension too small for the frontend kernels");
  dense_w_ = params.add(prefix + ".dense.weight", {flat, cfg.hidden},
                        normal_values(flat * cfg.hidden, std::sqrt(1.0 / static_cast<double>(flat)), rng));
  dense_b_ = params.add(prefix + ".dense.bias", {cfg.hidden}, std::vector<double>(cfg.hidden, 0.0));
}

Tensor ConvFrontend::forward(const Binding& b, const Tensor& features) const {
  if (features.rank() != 2 || features.dim(1) != cfg_.input_dim) {
    throw DimensionError("frontend expects [T x " + std::to_string(cfg_.input_dim) + "] features, got " +
                         to_string(features.shape()));
  }
  const std::size_t t = features.dim(0);
  if (t < cfg_.min_input_frames()) {
    throw InputError("input has " + std::to_string(t) + " frames; the frontend needs at least " +
                     std::to_string(cfg_.min_input_frames()));
  }
  Tensor x = ops::reshape(features, {t, cfg_.input_dim, 1});
  x = ops::relu(ops::add_bias(ops::conv2d(x, b[conv1_w_], {cfg_.conv1.stride_t, cfg_.conv1.stride_f}), b[conv1_b_]));
  x = ops::relu(ops::add_bias(ops::conv2d(x, b[conv2_w_], {cfg_.conv2.stride_t, cfg_.conv2.stride_f}), b[conv2_b_]));
  const std::size_t frames = x.dim(0);
  x = ops::reshape(x, {frames, x.size() / frames});
  return ops::linear(x, b[dense_w_], b[dense_b_]);
}

EncoderStack::EncoderStack(ParameterSet& params, const std::string& prefix, const EncoderConfig& cfg,
                           std::mt19937_64& rng)
    : cfg_(cfg) {
  cfg.validate();
  const std::size_t h = cfg.hidden;
  auto linear = [&](const std::string& name, std::size_t in, std::size_t out) {
    Linear l;
    l.w = params.add(name + ".weight", {in, out},
                     normal_values(in * out, std::sqrt(1.0 / static_cast<double>(in)), rng));
    l.b = params.add(name + ".bias", {out}, std::vector<double>(out, 0.0));
    return l;
  };
  auto norm = [&](const std::string& name) {
    Norm n;
    n.gain = params.add(name + ".gain", {h}, std::vector<double>(h, 1.0));
    n.bias = params.add(name + ".bias", {h}, std::vector<double>(h, 0.0));
    return n;
  };
  auto ffn = [&](const std::string& name) {
    FeedForward f;
    f.norm = norm(name + ".norm");
    f.in = linear(name + ".in", h, cfg.ffn);
    f.out = linear(name + ".out", cfg.ffn, h);
    return f;
  };
  for (std::size_t i = 0; i < cfg.n_blocks; ++i) {
    const std::string p = prefix + ".block" + std::to_string(i);
    Block blk;
    const bool conformer = cfg.kind == EncoderKind::conformer;
    blk.ffn1 = ffn(p + (conformer ? ".ffn1" : ".ffn"));
    blk.attention.norm = norm(p + ".attn.norm");
    blk.attention.q = linear(p + ".attn.q", h, h);
    blk.attention.k = linear(p + ".attn.k", h, h);
    blk.attention.v = linear(p + ".attn.v", h, h);
    blk.attention.out = linear(p + ".attn.out", h, h);
    if (conformer) {
      blk.conv.norm = norm(p + ".conv.norm");
      blk.conv.pointwise_in = linear(p + ".conv.pointwise_in", h, 2 * h);
      blk.conv.depthwise = params.add(
          p + ".conv.depthwise.weight", {cfg.conv_kernel, h},
          normal_values(cfg.conv_kernel * h, std::sqrt(1.0 / static_cast<double>(cfg.conv_kernel)), rng));
      blk.conv.depthwise_bias = params.add(p + ".conv.depthwise.bias", {h}, std::vector<double>(h, 0.0));
      blk.conv.pointwise_out = linear(p + ".conv.pointwise_out", h, h);
      blk.ffn2 = ffn(p + ".ffn2");
      blk.final_norm = norm(p + ".final_norm");
    }
    blocks_.push_back(blk);
  }
}

Tensor EncoderStack::linear(const Binding& b, const Linear& l, const Tensor& x) const {
  return ops::linear(x, b[l.w], b[l.b]);
}

Tensor EncoderStack::norm(const Binding& b, const Norm& n, const Tensor& x) const {
  return ops::layer_norm(x, b[n.gain], b[n.bias]);
}

Tensor EncoderStack::feed_forward(const Binding& b, const FeedForward& f, const Tensor& x) const {
  Tensor h = linear(b, f.in, norm(b, f.norm, x));
  h = cfg_.kind == EncoderKind::conformer ? ops::swish(h) : ops::relu(h);
  return linear(b, f.out, h);
}

Tensor EncoderStack::attention(const Binding& b, const Attention& a, const Tensor& x) const {
  const Tensor n = norm(b, a.norm, x);
  return ops::multi_head_attention(linear(b, a.q, n), linear(b, a.k, n), linear(b, a.v, n), cfg_.n_heads,
                                   b[a.out.w], b[a.out.b]);
}

Tensor EncoderStack::conv_module(const Binding& b, const ConvModule& c, const Tensor& x) const {
  Tensor h = ops::glu(linear(b, c.pointwise_in, norm(b, c.norm, x)));
  h = ops::swish(ops::add_bias(ops::depthwise_conv1d(h, b[c.depthwise]), b[c.depthwise_bias]));
  return linear(b, c.pointwise_out, h);
}

Tensor EncoderStack::forward(const Binding& b, const Tensor& x) const {
  if (x.rank() != 2 || x.dim(1) != cfg_.hidden) {
    throw DimensionError("encoder expects [T x " + std::to_string(cfg_.hidden) + "], got " + to_string(x.shape()));
  }
  Tensor y = x;
  for (const Block& blk : blocks_) {
    if (cfg_.kind == EncoderKind::transformer) {
      y = ops::add(y, attention(b, blk.attention, y));
      y = ops::add(y, feed_forward(b, blk.ffn1, y));
    } else {
      y = ops::add(y, ops::scale(feed_forward(b, blk.ffn1, y), 0.5));
      y = ops::add(y, attention(b, blk.attention, y));
      y = ops::add(y, conv_module(b, blk.conv, y));
      y = ops::add(y, ops::scale(feed_forward(b, blk.ffn2, y), 0.5));
      y = norm(b, blk.final_norm, y);
    }
  }
  return y;
}

// ---------------------------------------------------------------------------

std::vector<NamedArray> to_named_arrays(const ParameterSet& params) {
  std::vector<NamedArray> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.push_back({params.name(i), params.shape(i), {params.value(i).begin(), params.value(i).end()}});
  }
  return out;
}

void load_named_arrays(ParameterSet& params, const std::vector<NamedArray>& arrays) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const NamedArray* found = nullptr;
    for (const NamedArray& a : arrays) {
      if (a.name == params.name(i)) {
        found = &a;
        break;
      }
    }
    if (!found) throw FormatError("checkpoint lacks parameter " + params.name(i), 0);
    if (found->shape != params.shape(i)) {
      throw FormatError("checkpoint parameter " + params.name(i) + " has shape " + to_string(found->shape) +
                            ", model expects " + to_string(params.shape(i)),
                        0);
    }
    params.value_mut(i) = found->data;
  }
}

WakeWordModel::WakeWordModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  const std::size_t h = cfg.encoder.hidden;
  audio_frontend_ = ConvFrontend(params_, "audio.frontend", cfg.audio, rng);
  // Class token ~ N(0, 0.0004), i.e. standard deviation 0.02.
  audio_token_ = params_.add("audio.class_token", {h}, normal_values(h, 0.02, rng));
  audio_encoder_ = EncoderStack(params_, "audio.encoder", cfg.encoder, rng);
  if (cfg.uses_video()) {
    video_frontend_ = ConvFrontend(params_, "video.frontend", cfg.video, rng);
    if (cfg.fusion.site == FusionSite::attention) {
      video_token_ = params_.add("video.class_token", {h}, normal_values(h, 0.02, rng));
      video_encoder_ = EncoderStack(params_, "video.encoder", cfg.encoder, rng);
    }
    fusion_wa_ = params_.add("fusion.w_a", {1}, {cfg.fusion.w_a});
    fusion_wv_ = params_.add("fusion.w_v", {1}, {cfg.fusion.w_v});
  }
  // A zero head makes an untrained model output exactly 0.5.
  head_w_ = params_.add("head.weight", {h}, std::vector<double>(h, 0.0));
  head_b_ = params_.add("head.bias", {1}, {0.0});
}

Tensor WakeWordModel::encode(const Binding& b, const EncoderStack& enc, std::size_t token,
                             const Tensor& frames) const {
  Tensor seq = prepend_class_token(frames, b[token]);
  seq = add_positional_embedding(seq, cfg_.max_positions);
  return enc.forward(b, seq);
}

Tensor WakeWordModel::forward(const Binding& b, const FeatureMatrix& audio, const FeatureMatrix* video) const {
  const Tensor a = audio_frontend_.forward(b, to_tensor(audio));
  if (!cfg_.uses_video()) {
    return classify_head(encode(b, audio_encoder_, audio_token_, a), b[head_w_], b[head_b_]);
  }
  if (video == nullptr) throw ConfigError("the AV model needs video features");
  const Tensor v = video_frontend_.forward(b, to_tensor(*video));
  const Tensor w_a = cfg_.train_fusion_weights ? b[fusion_wa_] : Tensor::scalar(cfg_.fusion.w_a);
  const Tensor w_v = cfg_.train_fusion_weights ? b[fusion_wv_] : Tensor::scalar(cfg_.fusion.w_v);
  if (cfg_.fusion.site == FusionSite::conv) {
    // Bring both branches to the longer of the two frame counts.
    const std::size_t frames = std::max(a.dim(0), v.dim(0));
    const Tensor fused = fuse(resample_frames(a, frames), resample_frames(v, frames), cfg_.fusion.op, w_a, w_v);
    return classify_head(encode(b, audio_encoder_, audio_token_, fused), b[head_w_], b[head_b_]);
  }
  const Tensor cls_a = ops::slice_rows(encode(b, audio_encoder_, audio_token_, a), 0, 1);
  const Tensor cls_v = ops::slice_rows(encode(b, video_encoder_, video_token_, v), 0, 1);
  return classify_head(fuse(cls_a, cls_v, cfg_.fusion.op, w_a, w_v), b[head_w_], b[head_b_]);
}

double WakeWordModel::predict(const FeatureMatrix& audio, const FeatureMatrix* video) const {
  return forward(params_.bind(false), audio, video).item();
}

}  // namespace avwws
