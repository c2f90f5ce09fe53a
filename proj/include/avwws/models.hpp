// include/avwws/models.hpp

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

#pragma once

// A-Transformer, A-Conformer and AV-Transformer wake-word classifiers.
//
// Every model follows the same pipeline: a two-layer convolutional frontend
// with a dense projection turns a feature matrix into a frame-rate-reduced
// embedding sequence, a trainable class token is spliced in front of it,
// sinusoidal position embeddings are added, an encoder stack mixes the
// sequence, and a linear + sigmoid head reads the class-token row.
//
// The AV model fuses an audio and a video branch either right after the two
// frontends (FusionSite::conv) or between the class-token outputs of two
// separate encoder stacks (FusionSite::attention).

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "avwws/checkpoint.hpp"
#include "avwws/features.hpp"
#include "avwws/params.hpp"
#include "avwws/tensor.hpp"

namespace avwws {

struct ConvLayerSpec {
  std::size_t kernel_t = 3;
  std::size_t kernel_f = 3;
  std::size_t stride_t = 2;
  std::size_t stride_f = 2;
  std::size_t channels = 8;
};

struct ConvFrontendConfig {
  std::size_t input_dim = 63;
  ConvLayerSpec conv1;
  ConvLayerSpec conv2;
  std::size_t hidden = 64;  // dense output width, must equal the encoder width

  /// Output frames for `frames` input frames, 0 if the input is too short.
  std::size_t output_frames(std::size_t frames) const;
  std::size_t min_input_frames() const;
  std::size_t flattened_width() const;
};

enum class EncoderKind { transformer, conformer };

struct EncoderConfig {
  std::size_t n_blocks = 2;
  std::size_t n_heads = 4;
  std::size_t hidden = 64;
  std::size_t ffn = 256;
  EncoderKind kind = EncoderKind::transformer;
  std::size_t conv_kernel = 15;  // conformer depthwise kernel

  void validate() const;
};

enum class FusionSite { conv, attention };
enum class FusionOperator { weighted_sum, product };

struct FusionMode {
  FusionSite site = FusionSite::attention;
  FusionOperator op = FusionOperator::weighted_sum;
  double w_a = 0.7;
  double w_v = 0.3;
};

enum class ModelKind { a_transformer, a_conformer, av_transformer };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& s);
std::string to_string(FusionSite site);
FusionSite parse_fusion_site(const std::string& s);
std::string to_string(FusionOperator op);
FusionOperator parse_fusion_operator(const std::string& s);

struct ModelConfig {
  ModelKind kind = ModelKind::a_transformer;
  ConvFrontendConfig audio;
  ConvFrontendConfig video;
  EncoderConfig encoder;
  FusionMode fusion;
  bool train_fusion_weights = true;
  std::size_t max_positions = 1000;

  /// Hidden 64, 4 heads, 2 blocks, FFN 256.
  static ModelConfig desk(ModelKind kind, std::size_t video_dim = 16);
  /// Hidden 512, 8 heads, 4 blocks, FFN 2048.
  static ModelConfig full_scale(ModelKind kind, std::size_t video_dim = 512);

  bool uses_video() const { return kind == ModelKind::av_transformer; }
  void validate() const;
};

/// Parameter count of a model built from `cfg`, from the layer shapes alone.
std::size_t expected_parameter_count(const ModelConfig& cfg);

// ---------------------------------------------------------------------------
// Parameter-free building blocks.

/// Row 0 = token, rows 1.. = x. Throws DimensionError if widths differ.
Tensor prepend_class_token(const Tensor& x, const Tensor& token);

/// Sinusoidal table, [length x width]. Position p, column 2i holds
/// sin(p / 10000^(2i/width)) and column 2i+1 the matching cosine.
std::vector<double> positional_table(std::size_t length, std::size_t width);

/// x + table. Throws InputError if x has more rows than `max_positions`.
Tensor add_positional_embedding(const Tensor& x, std::size_t max_positions);

/// weighted_sum: w_a * y_a + w_v * y_v (w_a, w_v one-element tensors);
/// product: y_a * y_v elementwise, weights ignored.
Tensor fuse(const Tensor& y_a, const Tensor& y_v, FusionOperator op, const Tensor& w_a, const Tensor& w_v);

/// sigmoid(seq[0] * w + b) as a one-element tensor.
Tensor classify_head(const Tensor& seq, const Tensor& w, const Tensor& b);

/// Nearest-neighbour resampling of the rows of x to `frames` rows.
Tensor resample_frames(const Tensor& x, std::size_t frames);

// ---------------------------------------------------------------------------
// Parametrized components. Each registers its parameters in a ParameterSet
// at construction and reads them from a Binding during forward().

class ConvFrontend {
 public:
  ConvFrontend() = default;
  ConvFrontend(ParameterSet& params, const std::string& prefix, const ConvFrontendConfig& cfg, std::mt19937_64& rng);

  /// [T x D] features -> [T' x hidden]. Throws InputError if T is below
  /// cfg.min_input_frames().
  Tensor forward(const Binding& b, const Tensor& features) const;
  const ConvFrontendConfig& config() const { return cfg_; }

 private:
  ConvFrontendConfig cfg_;
  std::size_t conv1_w_ = 0, conv1_b_ = 0, conv2_w_ = 0, conv2_b_ = 0, dense_w_ = 0, dense_b_ = 0;
};

class EncoderStack {
 public:
  EncoderStack() = default;
  EncoderStack(ParameterSet& params, const std::string& prefix, const EncoderConfig& cfg, std::mt19937_64& rng);

  /// Shape-preserving; n_blocks == 0 returns x itself.
  Tensor forward(const Binding& b, const Tensor& x) const;
  const EncoderConfig& config() const { return cfg_; }

 private:
  struct Linear {
    std::size_t w = 0, b = 0;
  };
  struct Norm {
    std::size_t gain = 0, bias = 0;
  };
  struct FeedForward {
    Norm norm;
    Linear in, out;
  };
  struct Attention {
    Norm norm;
    Linear q, k, v, out;
  };
  struct ConvModule {
    Norm norm;
    Linear pointwise_in;  // hidden -> 2 hidden, followed by GLU
    std::size_t depthwise = 0;
    std::size_t depthwise_bias = 0;
    Linear pointwise_out;
  };
  struct Block {
    FeedForward ffn1;
    Attention attention;
    ConvModule conv;  // conformer only
    FeedForward ffn2;  // conformer only
    Norm final_norm;  // conformer only
  };

  Tensor linear(const Binding& b, const Linear& l, const Tensor& x) const;
  Tensor norm(const Binding& b, const Norm& n, const Tensor& x) const;
  Tensor feed_forward(const Binding& b, const FeedForward& f, const Tensor& x) const;
  Tensor attention(const Binding& b, const Attention& a, const Tensor& x) const;
  Tensor conv_module(const Binding& b, const ConvModule& c, const Tensor& x) const;

  EncoderConfig cfg_;
  std::vector<Block> blocks_;
};

/// Named parameter table of a model in checkpoint form, and back.
std::vector<NamedArray> to_named_arrays(const ParameterSet& params);
/// Overwrites every parameter of `params` from `arrays` by name; throws
/// FormatError if a name is missing or a shape differs.
void load_named_arrays(ParameterSet& params, const std::vector<NamedArray>& arrays);

class WakeWordModel {
 public:
  /// Initializes all parameters deterministically from `seed`.
  WakeWordModel(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const ParameterSet& params() const { return params_; }
  ParameterSet& params() { return params_; }

  /// Wake-word probability as a one-element tensor. `video` is required for
  /// the AV model and ignored otherwise.
  Tensor forward(const Binding& b, const FeatureMatrix& audio, const FeatureMatrix* video = nullptr) const;
  double predict(const FeatureMatrix& audio, const FeatureMatrix* video = nullptr) const;

  // Indices of named parameters, exposed for tests.
  std::size_t audio_token() const { return audio_token_; }
  std::size_t video_token() const { return video_token_; }
  std::size_t head_weight() const { return head_w_; }
  std::size_t head_bias() const { return head_b_; }
  std::size_t fusion_w_a() const { return fusion_wa_; }
  std::size_t fusion_w_v() const { return fusion_wv_; }
  const ConvFrontend& audio_frontend() const { return audio_frontend_; }
  const ConvFrontend& video_frontend() const { return video_frontend_; }
  const EncoderStack& audio_encoder() const { return audio_encoder_; }

 private:
  Tensor encode(const Binding& b, const EncoderStack& enc, std::size_t token, const Tensor& frames) const;

  ModelConfig cfg_;
  ParameterSet params_;
  ConvFrontend audio_frontend_;
  ConvFrontend video_frontend_;
  EncoderStack audio_encoder_;
  EncoderStack video_encoder_;
  std::size_t audio_token_ = 0, video_token_ = 0;
  std::size_t fusion_wa_ = 0, fusion_wv_ = 0;
  std::size_t head_w_ = 0, head_b_ = 0;
};

/// Feature matrix as a constant [T x D] tensor.
Tensor to_tensor(const FeatureMatrix& f);

}  // namespace avwws
