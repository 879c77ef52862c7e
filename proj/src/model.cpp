#include "acnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "acnn/errors.hpp"
#include "acnn/io.hpp"

namespace acnn {

using json = nlohmann::json;

const char* conv_activation_name(ConvActivation a) {
  switch (a) {
    case ConvActivation::kRelu: return "relu";
    case ConvActivation::kNone: return "none";
    case ConvActivation::kTanh: return "tanh";
  }
  return "?";
}

ConvActivation conv_activation_from_name(const std::string& name) {
  if (name == "relu") return ConvActivation::kRelu;
  if (name == "none") return ConvActivation::kNone;
  if (name == "tanh") return ConvActivation::kTanh;
  throw InvalidConfig("unknown conv activation: " + name);
}

void ModelConfig::validate() const {
  if (input_dim < 1) throw InvalidConfig("input_dim must be >= 1");
  if (kernel_widths.empty()) throw InvalidConfig("need at least one kernel width");
  std::set<int> distinct(kernel_widths.begin(), kernel_widths.end());
  if (distinct.size() != kernel_widths.size())
    throw InvalidConfig("kernel widths must be distinct");
  for (int w : kernel_widths)
    if (w < 1) throw InvalidConfig("kernel widths must be >= 1");
  if (kernels_per_width < 1) throw InvalidConfig("kernels_per_width must be >= 1");
  if (pool_size < 1 || pool_stride < 1) throw InvalidConfig("pool size/stride must be >= 1");
  const double p = effective_drop_prob();
  if (p < 0.0 || p >= 1.0) throw InvalidConfig("effective drop probability must be in [0, 1)");
  if (num_emotions < 2 || num_activation_bins < 2 || num_valence_bins < 2)
    throw InvalidConfig("each head needs at least 2 classes");
  if (input_frames < min_input_frames())
    throw InvalidConfig("input_frames " + std::to_string(input_frames) +
                        " below the minimum " + std::to_string(min_input_frames()) +
                        " required by kernel widths and pooling");
}

int ModelConfig::min_input_frames() const {
  int need = 1;
  for (int w : kernel_widths) need = std::max(need, w + pool_size - 1);
  return need;
}

int ModelConfig::hidden_size() const {
  int h = 0;
  for (int w : kernel_widths) h += kernels_per_width * pooled_len(w);
  if (use_attention) h += kernels_per_width * static_cast<int>(kernel_widths.size());
  return h;
}

std::vector<ParamTensor*> ModelParams::all() {
  std::vector<ParamTensor*> out;
  for (auto& g : groups) {
    out.push_back(&g.kernels);
    out.push_back(&g.bias);
    if (!g.attn_score.empty()) out.push_back(&g.attn_score);
  }
  out.push_back(&emotion_w);
  out.push_back(&emotion_b);
  if (!activation_w.empty()) {
    out.push_back(&activation_w);
    out.push_back(&activation_b);
    out.push_back(&valence_w);
    out.push_back(&valence_b);
  }
  return out;
}

std::vector<const ParamTensor*> ModelParams::all() const {
  auto mutable_all = const_cast<ModelParams*>(this)->all();
  return {mutable_all.begin(), mutable_all.end()};
}

void ModelParams::zero_grads() {
  for (ParamTensor* t : all()) t->zero_grad();
}

ModelParams init_model(const ModelConfig& cfg, uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ModelParams p;
  p.groups.resize(cfg.kernel_widths.size());
  for (size_t g = 0; g < cfg.kernel_widths.size(); ++g) {
    const int k = cfg.kernel_widths[g];
    const std::string tag = "conv" + std::to_string(g);
    p.groups[g].kernels = ParamTensor(tag + ".kernels", cfg.kernels_per_width, cfg.input_dim * k);
    glorot_init(p.groups[g].kernels, rng);
    p.groups[g].bias = ParamTensor(tag + ".bias", cfg.kernels_per_width, 1);
    if (cfg.use_attention) {
      p.groups[g].attn_score = ParamTensor("attn" + std::to_string(g) + ".score",
                                           cfg.kernels_per_width, 1);
      glorot_init(p.groups[g].attn_score, rng);
    }
  }
  const int hidden = cfg.hidden_size();
  p.emotion_w = ParamTensor("head_emotion.w", cfg.num_emotions, hidden);
  glorot_init(p.emotion_w, rng);
  p.emotion_b = ParamTensor("head_emotion.b", cfg.num_emotions, 1);
  if (cfg.multi_view) {
    p.activation_w = ParamTensor("head_activation.w", cfg.num_activation_bins, hidden);
    glorot_init(p.activation_w, rng);
    p.activation_b = ParamTensor("head_activation.b", cfg.num_activation_bins, 1);
    p.valence_w = ParamTensor("head_valence.w", cfg.num_valence_bins, hidden);
    glorot_init(p.valence_w, rng);
    p.valence_b = ParamTensor("head_valence.b", cfg.num_valence_bins, 1);
  }
  return p;
}

namespace {

Matrix apply_activation(Matrix&& x, ConvActivation act) {
  switch (act) {
    case ConvActivation::kRelu:
      for (auto& v : x.v) v = v > 0.0 ? v : 0.0;
      return std::move(x);
    case ConvActivation::kTanh:
      for (auto& v : x.v) v = std::tanh(v);
      return std::move(x);
    case ConvActivation::kNone: return std::move(x);
  }
  return std::move(x);
}

}  // namespace

ForwardOutput forward(const ModelConfig& cfg, const ModelParams& params, const Matrix& input,
                      bool training, Rng* rng) {
  if (input.rows != cfg.input_dim)
    throw DimensionMismatch("input has " + std::to_string(input.rows) + " rows, model expects " +
                            std::to_string(cfg.input_dim));
  if (input.cols < cfg.min_input_frames())
    throw InputTooShort("input has " + std::to_string(input.cols) + " frames, model requires >= " +
                        std::to_string(cfg.min_input_frames()));
  if (input.cols != cfg.input_frames)
    throw ShapeMismatch("input has " + std::to_string(input.cols) +
                        " frames, heads are sized for " + std::to_string(cfg.input_frames));

  ForwardOutput out;
  out.cache.input = &input;
  out.cache.training = training;
  out.cache.groups.resize(params.groups.size());

  std::vector<double> hidden;
  hidden.reserve(cfg.hidden_size());

  // Pooled branches first, attention vectors appended after all groups.
  std::vector<std::vector<double>> attentive(params.groups.size());
  for (size_t g = 0; g < params.groups.size(); ++g) {
    const auto& gp = params.groups[g];
    const int k = cfg.kernel_widths[g];
    Matrix conv = nn::conv_full_height_forward(
        input, gp.kernels.value, std::span<const double>(gp.bias.value.v), k);
    Matrix activated = apply_activation(std::move(conv), cfg.conv_activation);

    auto& gc = out.cache.groups[g];
    Matrix pooled = nn::maxpool1d_forward(activated, cfg.pool_size, cfg.pool_stride, &gc.pool);
    hidden.insert(hidden.end(), pooled.v.begin(), pooled.v.end());

    if (cfg.use_attention) {
      std::vector<double> alphas;
      attentive[g] = nn::attention_forward(
          activated, std::span<const double>(gp.attn_score.value.v), &alphas);
      out.alphas.push_back(std::move(alphas));
    }
    gc.activated = std::move(activated);
  }
  for (auto& a : attentive) hidden.insert(hidden.end(), a.begin(), a.end());

  out.cache.drop_prob = cfg.effective_drop_prob();
  if (training && out.cache.drop_prob > 0.0 && rng == nullptr)
    throw InvalidConfig("training-mode forward with dropout needs an rng");
  Rng unused_rng(0);
  nn::dropout_forward(hidden, out.cache.drop_prob, rng ? *rng : unused_rng, training,
                      &out.cache.dropout_mask);

  out.emotion_logits = nn::linear_forward(hidden, params.emotion_w.value,
                                          std::span<const double>(params.emotion_b.value.v));
  if (cfg.multi_view) {
    out.activation_logits = nn::linear_forward(
        hidden, params.activation_w.value, std::span<const double>(params.activation_b.value.v));
    out.valence_logits = nn::linear_forward(hidden, params.valence_w.value,
                                            std::span<const double>(params.valence_b.value.v));
  }
  out.cache.hidden = std::move(hidden);
  return out;
}

double multi_view_loss(const ModelConfig& cfg, ModelParams& params, const ForwardOutput& out,
                       const Labels& labels) {
  if (labels.emotion < 0 || labels.emotion >= cfg.num_emotions)
    throw LabelOutOfRange("emotion label " + std::to_string(labels.emotion));
  if (cfg.multi_view) {
    if (labels.activation_bin < 0 || labels.activation_bin >= cfg.num_activation_bins)
      throw LabelOutOfRange("activation bin " + std::to_string(labels.activation_bin));
    if (labels.valence_bin < 0 || labels.valence_bin >= cfg.num_valence_bins)
      throw LabelOutOfRange("valence bin " + std::to_string(labels.valence_bin));
  }
  const auto& cache = out.cache;
  if (cache.input == nullptr) throw MissingCache("loss requires a forward cache");

  const std::vector<double>& hidden = cache.hidden;
  std::vector<double> hidden_grad(hidden.size(), 0.0);

  auto head_backward = [&](const std::vector<double>& logits, int target, double weight,
                           ParamTensor& w, ParamTensor& b) {
    auto xent = nn::softmax_cross_entropy(logits, target);
    if (weight != 1.0)
      for (auto& gl : xent.logit_grad) gl *= weight;
    std::vector<double> xg;
    nn::linear_backward(hidden, w.value, xent.logit_grad, w.grad, std::span<double>(b.grad.v),
                        &xg);
    for (size_t i = 0; i < hidden_grad.size(); ++i) hidden_grad[i] += xg[i];
    return weight * xent.loss;
  };

  double loss = head_backward(out.emotion_logits, labels.emotion, 1.0, params.emotion_w,
                              params.emotion_b);
  if (cfg.multi_view) {
    loss += head_backward(out.activation_logits, labels.activation_bin, cfg.mv_weight_activation,
                          params.activation_w, params.activation_b);
    loss += head_backward(out.valence_logits, labels.valence_bin, cfg.mv_weight_valence,
                          params.valence_w, params.valence_b);
  }

  nn::dropout_backward(hidden_grad, cache.drop_prob, cache.dropout_mask);

  // Split the hidden gradient back into pooled slices and attention slices.
  size_t offset = 0;
  std::vector<Matrix> map_grads(params.groups.size());
  for (size_t g = 0; g < params.groups.size(); ++g) {
    const auto& gc = cache.groups[g];
    const int n = gc.pool.rows, len = gc.pool.out_len;
    Matrix pooled_up(n, len);
    std::copy(hidden_grad.begin() + offset, hidden_grad.begin() + offset + pooled_up.size(),
              pooled_up.v.begin());
    offset += pooled_up.size();
    map_grads[g] = nn::maxpool1d_backward(gc.pool, pooled_up);
  }
  if (cfg.use_attention) {
    for (size_t g = 0; g < params.groups.size(); ++g) {
      auto& gp = params.groups[g];
      const auto& gc = cache.groups[g];
      std::span<const double> up(hidden_grad.data() + offset, cfg.kernels_per_width);
      offset += cfg.kernels_per_width;
      auto ag = nn::attention_backward(gc.activated,
                                       std::span<const double>(gp.attn_score.value.v),
                                       out.alphas[g], up);
      for (size_t i = 0; i < map_grads[g].v.size(); ++i) map_grads[g].v[i] += ag.x_grad.v[i];
      for (int i = 0; i < cfg.kernels_per_width; ++i)
        gp.attn_score.grad.v[i] += ag.score_param_grad[i];
    }
  }

  for (size_t g = 0; g < params.groups.size(); ++g) {
    auto& gp = params.groups[g];
    const auto& gc = cache.groups[g];
    Matrix up = std::move(map_grads[g]);
    switch (cfg.conv_activation) {
      case ConvActivation::kRelu:
        for (size_t i = 0; i < up.v.size(); ++i)
          if (gc.activated.v[i] <= 0.0) up.v[i] = 0.0;
        break;
      case ConvActivation::kTanh:
        for (size_t i = 0; i < up.v.size(); ++i)
          up.v[i] *= 1.0 - gc.activated.v[i] * gc.activated.v[i];
        break;
      case ConvActivation::kNone: break;
    }
    auto cg = nn::conv_full_height_backward(*cache.input, gp.kernels.value, cfg.kernel_widths[g],
                                            up, /*want_input_grad=*/false);
    for (size_t i = 0; i < gp.kernels.grad.v.size(); ++i)
      gp.kernels.grad.v[i] += cg.kernel_grad.v[i];
    for (int i = 0; i < cfg.kernels_per_width; ++i) gp.bias.grad.v[i] += cg.bias_grad[i];
  }
  return loss;
}

namespace {

int argmax(const std::vector<double>& v) {
  int best = 0;
  for (size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = static_cast<int>(i);
  return best;
}

}  // namespace

Prediction predict(const ModelConfig& cfg, const ModelParams& params, const Matrix& input) {
  ForwardOutput out = forward(cfg, params, input, /*training=*/false, nullptr);
  Prediction pred;
  pred.emotion = argmax(out.emotion_logits);
  if (cfg.multi_view) {
    pred.activation_bin = argmax(out.activation_logits);
    pred.valence_bin = argmax(out.valence_logits);
  }
  pred.alphas = std::move(out.alphas);
  return pred;
}

void save_params(const ModelParams& params, const std::string& path) {
  std::vector<NamedTensor> tensors;
  for (const ParamTensor* t : params.all()) tensors.push_back({t->name, t->value});
  write_tensor_file(path, tensors);
}

ModelParams load_params(const ModelConfig& cfg, const std::string& path) {
  const auto tensors = read_tensor_file(path);
  ModelParams params = init_model(cfg, /*seed=*/0);
  auto slots = params.all();
  if (tensors.size() != slots.size())
    throw ShapeMismatch(path + ": file has " + std::to_string(tensors.size()) +
                        " tensors, config expects " + std::to_string(slots.size()));
  for (size_t i = 0; i < slots.size(); ++i) {
    if (tensors[i].name != slots[i]->name)
      throw ShapeMismatch(path + ": tensor " + std::to_string(i) + " is '" + tensors[i].name +
                          "', expected '" + slots[i]->name + "'");
    if (!tensors[i].value.same_shape(slots[i]->value))
      throw ShapeMismatch(path + ": tensor '" + tensors[i].name + "' is " +
                          tensors[i].value.shape_str() + ", expected " +
                          slots[i]->value.shape_str());
    slots[i]->value = tensors[i].value;
    slots[i]->zero_grad();
  }
  return params;
}

std::string model_config_json(const ModelConfig& cfg) {
  json j;
  j["input_dim"] = cfg.input_dim;
  j["input_frames"] = cfg.input_frames;
  j["kernel_widths"] = cfg.kernel_widths;
  j["kernels_per_width"] = cfg.kernels_per_width;
  j["pool_size"] = cfg.pool_size;
  j["pool_stride"] = cfg.pool_stride;
  j["conv_activation"] = conv_activation_name(cfg.conv_activation);
  j["dropout_rate"] = cfg.dropout_rate;
  j["dropout_rate_is_keep_prob"] = cfg.dropout_rate_is_keep_prob;
  j["use_attention"] = cfg.use_attention;
  j["multi_view"] = cfg.multi_view;
  j["num_emotions"] = cfg.num_emotions;
  j["num_activation_bins"] = cfg.num_activation_bins;
  j["num_valence_bins"] = cfg.num_valence_bins;
  j["mv_weight_activation"] = cfg.mv_weight_activation;
  j["mv_weight_valence"] = cfg.mv_weight_valence;
  return j.dump();
}

ModelConfig model_config_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  ModelConfig cfg;
  cfg.input_dim = j.at("input_dim").get<int>();
  cfg.input_frames = j.at("input_frames").get<int>();
  cfg.kernel_widths = j.at("kernel_widths").get<std::vector<int>>();
  cfg.kernels_per_width = j.at("kernels_per_width").get<int>();
  cfg.pool_size = j.at("pool_size").get<int>();
  cfg.pool_stride = j.at("pool_stride").get<int>();
  cfg.conv_activation = conv_activation_from_name(j.at("conv_activation").get<std::string>());
  cfg.dropout_rate = j.at("dropout_rate").get<double>();
  cfg.dropout_rate_is_keep_prob = j.at("dropout_rate_is_keep_prob").get<bool>();
  cfg.use_attention = j.at("use_attention").get<bool>();
  cfg.multi_view = j.at("multi_view").get<bool>();
  cfg.num_emotions = j.at("num_emotions").get<int>();
  cfg.num_activation_bins = j.at("num_activation_bins").get<int>();
  cfg.num_valence_bins = j.at("num_valence_bins").get<int>();
  cfg.mv_weight_activation = j.at("mv_weight_activation").get<double>();
  cfg.mv_weight_valence = j.at("mv_weight_valence").get<double>();
  return cfg;
}

}  // namespace acnn
