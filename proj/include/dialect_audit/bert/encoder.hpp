// Copyright 2026 The dialect-audit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Forward pass of a BERT sequence classifier (post-LayerNorm encoder, tanh
// pooler over [CLS], linear head) in single precision. Weight names follow
// the Hugging Face BertForSequenceClassification layout; Linear weights are
// stored [out, in].

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialect_audit/bert/safetensors.hpp"
#include "dialect_audit/error.hpp"

namespace dialect_audit::bert {

using Matrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<float, 1, Eigen::Dynamic>;

enum class Activation { kGeluErf, kGeluTanh, kRelu };

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t hidden_size = 768;
  std::size_t num_layers = 12;
  std::size_t num_heads = 12;
  std::size_t intermediate_size = 3072;
  std::size_t max_positions = 512;
  std::size_t type_vocab_size = 2;
  std::size_t num_labels = 6;
  float layer_norm_eps = 1e-12f;
  Activation activation = Activation::kGeluErf;

  static EncoderConfig from_json(const nlohmann::json& j) {
    EncoderConfig c;
    c.vocab_size = j.at("vocab_size");
    c.hidden_size = j.value("hidden_size", c.hidden_size);
    c.num_layers = j.value("num_hidden_layers", c.num_layers);
    c.num_heads = j.value("num_attention_heads", c.num_heads);
    c.intermediate_size = j.value("intermediate_size", c.intermediate_size);
    c.max_positions = j.value("max_position_embeddings", c.max_positions);
    c.type_vocab_size = j.value("type_vocab_size", c.type_vocab_size);
    c.layer_norm_eps = j.value("layer_norm_eps", 1e-12f);
    if (j.contains("id2label")) {
      c.num_labels = j.at("id2label").size();
    } else {
      c.num_labels = j.value("num_labels", c.num_labels);
    }
    const std::string act = j.value("hidden_act", std::string("gelu"));
    if (act == "gelu") {
      c.activation = Activation::kGeluErf;
    } else if (act == "gelu_new" || act == "gelu_pytorch_tanh") {
      c.activation = Activation::kGeluTanh;
    } else if (act == "relu") {
      c.activation = Activation::kRelu;
    } else {
      throw InputError("unsupported hidden_act '" + act + "'");
    }
    if (c.num_heads == 0 || c.hidden_size % c.num_heads != 0) {
      throw InputError("hidden_size must be a multiple of num_attention_heads");
    }
    return c;
  }
};

class BertClassifier {
 public:
  BertClassifier(const EncoderConfig& cfg, TensorMap tensors,
                 const std::string& path)
      : cfg_(cfg), path_(path), tensors_(std::move(tensors)) {
    const auto H = cfg_.hidden_size;
    word_emb_ = take("bert.embeddings.word_embeddings.weight",
                     {cfg_.vocab_size, H});
    pos_emb_ = take("bert.embeddings.position_embeddings.weight",
                    {cfg_.max_positions, H});
    type_emb_ = take("bert.embeddings.token_type_embeddings.weight",
                     {cfg_.type_vocab_size, H});
    emb_norm_ = take_norm("bert.embeddings.LayerNorm");
    for (std::size_t i = 0; i < cfg_.num_layers; ++i) {
      const std::string p = "bert.encoder.layer." + std::to_string(i) + ".";
      Layer l;
      l.query = take_linear(p + "attention.self.query", H, H);
      l.key = take_linear(p + "attention.self.key", H, H);
      l.value = take_linear(p + "attention.self.value", H, H);
      l.attn_out = take_linear(p + "attention.output.dense", H, H);
      l.attn_norm = take_norm(p + "attention.output.LayerNorm");
      l.ffn_in = take_linear(p + "intermediate.dense", cfg_.intermediate_size, H);
      l.ffn_out = take_linear(p + "output.dense", H, cfg_.intermediate_size);
      l.ffn_norm = take_norm(p + "output.LayerNorm");
      layers_.push_back(std::move(l));
    }
    pooler_ = take_linear("bert.pooler.dense", H, H);
    head_ = take_linear("classifier", cfg_.num_labels, H);
    tensors_.clear();
  }

  const EncoderConfig& config() const { return cfg_; }

  /// Raw logits for one sequence of token ids (segment 0 throughout).
  std::vector<float> logits(std::span<const std::int32_t> ids) const {
    const auto n = static_cast<Eigen::Index>(ids.size());
    const auto H = static_cast<Eigen::Index>(cfg_.hidden_size);
    if (ids.empty() || ids.size() > cfg_.max_positions) {
      throw ScoringError("sequence length " + std::to_string(ids.size()) +
                         " outside [1, " + std::to_string(cfg_.max_positions) +
                         "]");
    }
    Matrix x(n, H);
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto id = ids[static_cast<std::size_t>(t)];
      if (id < 0 || static_cast<std::size_t>(id) >= cfg_.vocab_size) {
        throw ScoringError("token id " + std::to_string(id) +
                           " outside the embedding table");
      }
      x.row(t) = word_emb_.row(id) + pos_emb_.row(t) + type_emb_.row(0);
    }
    layer_norm(x, emb_norm_);

    const auto heads = static_cast<Eigen::Index>(cfg_.num_heads);
    const Eigen::Index d = H / heads;
    const float scale = 1.0f / std::sqrt(static_cast<float>(d));
    Matrix context(n, H);
    for (const Layer& l : layers_) {
      const Matrix q = apply(l.query, x);
      const Matrix k = apply(l.key, x);
      const Matrix v = apply(l.value, x);
      for (Eigen::Index h = 0; h < heads; ++h) {
        Matrix s = (q.middleCols(h * d, d) * k.middleCols(h * d, d).transpose()) *
                   scale;
        for (Eigen::Index r = 0; r < n; ++r) {
          const float mx = s.row(r).maxCoeff();
          s.row(r) = (s.row(r).array() - mx).exp();
          s.row(r) /= s.row(r).sum();
        }
        context.middleCols(h * d, d) = s * v.middleCols(h * d, d);
      }
      x = apply(l.attn_out, context) + x;
      layer_norm(x, l.attn_norm);
      Matrix inner = apply(l.ffn_in, x);
      activate(inner);
      x = apply(l.ffn_out, inner) + x;
      layer_norm(x, l.ffn_norm);
    }

    Matrix pooled = apply(pooler_, x.topRows(1));
    pooled = pooled.array().tanh();
    const Matrix out = apply(head_, pooled);
    return {out.data(), out.data() + out.size()};
  }

 private:
  struct Linear {
    Matrix weight;  // [out, in]
    Vector bias;
  };
  struct Norm {
    Vector gamma;
    Vector beta;
  };
  struct Layer {
    Linear query, key, value, attn_out, ffn_in, ffn_out;
    Norm attn_norm, ffn_norm;
  };

  const Tensor& find(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw LoadError(path_, "missing tensor '" + name + "'");
    return it->second;
  }

  // Older checkpoints name LayerNorm parameters gamma/beta.
  const Tensor& find_either(const std::string& a, const std::string& b) const {
    if (tensors_.count(a)) return tensors_.find(a)->second;
    return find(b);
  }

  Matrix take(const std::string& name, std::vector<std::size_t> shape) const {
    return to_matrix(find(name), name, shape);
  }

  Matrix to_matrix(const Tensor& t, const std::string& name,
                   const std::vector<std::size_t>& shape) const {
    if (t.shape != shape) {
      std::string want, got;
      for (auto s : shape) want += std::to_string(s) + ",";
      for (auto s : t.shape) got += std::to_string(s) + ",";
      throw LoadError(path_, "tensor '" + name + "' has shape [" + got +
                                 "] but the config implies [" + want + "]");
    }
    const auto rows = static_cast<Eigen::Index>(shape[0]);
    const auto cols =
        static_cast<Eigen::Index>(shape.size() > 1 ? shape[1] : 1);
    return Eigen::Map<const Matrix>(t.data.data(), rows, cols);
  }

  Vector take_vector(const Tensor& t, const std::string& name,
                     std::size_t n) const {
    return to_matrix(t, name, {n}).transpose();
  }

  Linear take_linear(const std::string& prefix, std::size_t out,
                     std::size_t in) const {
    Linear l;
    l.weight = take(prefix + ".weight", {out, in});
    l.bias = take_vector(find(prefix + ".bias"), prefix + ".bias", out);
    return l;
  }

  Norm take_norm(const std::string& prefix) const {
    Norm n;
    n.gamma = take_vector(find_either(prefix + ".weight", prefix + ".gamma"),
                          prefix + ".weight", cfg_.hidden_size);
    n.beta = take_vector(find_either(prefix + ".bias", prefix + ".beta"),
                         prefix + ".bias", cfg_.hidden_size);
    return n;
  }

  static Matrix apply(const Linear& l, const Matrix& x) {
    Matrix y = x * l.weight.transpose();
    y.rowwise() += l.bias;
    return y;
  }

  void layer_norm(Matrix& x, const Norm& n) const {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      auto row = x.row(r);
      const float mean = row.mean();
      const float var = (row.array() - mean).square().mean();
      const float inv = 1.0f / std::sqrt(var + cfg_.layer_norm_eps);
      row = ((row.array() - mean) * inv * n.gamma.array() + n.beta.array())
                .matrix();
    }
  }

  void activate(Matrix& x) const {
    switch (cfg_.activation) {
      case Activation::kGeluErf:
        x = x.unaryExpr([](float v) {
          return 0.5f * v * (1.0f + std::erf(v * 0.70710678118654752f));
        });
        break;
      case Activation::kGeluTanh:
        x = x.unaryExpr([](float v) {
          const float c = 0.79788456080286536f;  // sqrt(2/pi)
          return 0.5f * v * (1.0f + std::tanh(c * (v + 0.044715f * v * v * v)));
        });
        break;
      case Activation::kRelu:
        x = x.cwiseMax(0.0f);
        break;
    }
  }

  EncoderConfig cfg_;
  std::string path_;
  TensorMap tensors_;
  Matrix word_emb_, pos_emb_, type_emb_;
  Norm emb_norm_;
  std::vector<Layer> layers_;
  Linear pooler_, head_;
};

}  // namespace dialect_audit::bert
