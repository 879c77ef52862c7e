#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "acnn/matrix.hpp"
#include "acnn/nn.hpp"
#include "acnn/rng.hpp"

namespace acnn {

enum class ConvActivation { kRelu, kNone, kTanh };

const char* conv_activation_name(ConvActivation a);
ConvActivation conv_activation_from_name(const std::string& name);

struct ModelConfig {
  int input_dim = 26;
  int input_frames = 748;  // fixed frame count the heads are sized for
  std::vector<int> kernel_widths = {5, 10};
  int kernels_per_width = 100;
  int pool_size = 30;
  int pool_stride = 3;
  ConvActivation conv_activation = ConvActivation::kRelu;

  // The dropout knob follows the keep/drop ambiguity in period tooling: by
  // default the rate is a drop probability; set rate_is_keep_prob to read it
  // as a keep probability instead.
  double dropout_rate = 0.2;
  bool dropout_rate_is_keep_prob = false;

  bool use_attention = true;
  bool multi_view = true;
  int num_emotions = 4;
  int num_activation_bins = 3;
  int num_valence_bins = 3;
  double mv_weight_activation = 1.0;
  double mv_weight_valence = 1.0;

  double effective_drop_prob() const {
    return dropout_rate_is_keep_prob ? 1.0 - dropout_rate : dropout_rate;
  }

  void validate() const;  // InvalidConfig

  int conv_out_len(int width) const { return input_frames - width + 1; }
  int pooled_len(int width) const { return (conv_out_len(width) - pool_size) / pool_stride + 1; }
  // Minimum frame count the topology supports.
  int min_input_frames() const;
  int hidden_size() const;
};

struct ConvGroupParams {
  ParamTensor kernels;     // n x (d * k)
  ParamTensor bias;        // n x 1
  ParamTensor attn_score;  // n x 1 (empty when attention disabled)
};

struct ModelParams {
  std::vector<ConvGroupParams> groups;
  ParamTensor emotion_w, emotion_b;
  ParamTensor activation_w, activation_b;  // empty in single-view models
  ParamTensor valence_w, valence_b;

  std::vector<ParamTensor*> all();
  std::vector<const ParamTensor*> all() const;
  void zero_grads();
};

struct ForwardOutput {
  std::vector<double> emotion_logits;
  std::vector<double> activation_logits;  // empty in single-view
  std::vector<double> valence_logits;
  std::vector<std::vector<double>> alphas;  // per kernel-width group; empty without attention

  struct GroupCache {
    Matrix activated;  // n x T, post-activation feature map
    nn::MaxPoolCache pool;
  };
  struct Cache {
    const Matrix* input = nullptr;
    std::vector<GroupCache> groups;
    std::vector<double> hidden;  // as seen by the heads (post-dropout)
    std::vector<uint8_t> dropout_mask;
    double drop_prob = 0.0;
    bool training = false;
  };
  Cache cache;
};

struct Labels {
  int emotion = 0;
  int activation_bin = 0;
  int valence_bin = 0;
};

struct Prediction {
  int emotion = 0;
  int activation_bin = -1;  // -1 in single-view models
  int valence_bin = -1;
  std::vector<std::vector<double>> alphas;
};

// Deterministic Glorot-uniform initialization; biases zero.
ModelParams init_model(const ModelConfig& cfg, uint64_t seed);

// rng is only consulted for dropout and may be null in inference mode.
ForwardOutput forward(const ModelConfig& cfg, const ModelParams& params, const Matrix& input,
                      bool training, Rng* rng);

// Cross-entropy on the emotion head plus weighted activation/valence terms in
// multi-view mode. Accumulates parameter gradients and returns the loss.
double multi_view_loss(const ModelConfig& cfg, ModelParams& params, const ForwardOutput& out,
                       const Labels& labels);

Prediction predict(const ModelConfig& cfg, const ModelParams& params, const Matrix& input);

void save_params(const ModelParams& params, const std::string& path);
// ShapeMismatch when the stored tensors do not fit cfg.
ModelParams load_params(const ModelConfig& cfg, const std::string& path);

// Canonical JSON of the config (sorted keys) and its fingerprint.
std::string model_config_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& json_text);

}  // namespace acnn
