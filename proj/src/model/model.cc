// Copyright (c) 2026 OrthoSpot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "orthospot/model/model.h"

#include <algorithm>
#include <cmath>

#include "orthospot/autodiff/ops.h"
#include "orthospot/base/error.h"
#include "orthospot/base/rng.h"

namespace orthospot {

void ModelConfig::Validate() const {
  if (input_dim == 0 || tconv_channels == 0 || tconv_width == 0 || hidden == 0 ||
      gru_layers == 0 || num_keywords == 0 || num_speakers == 0) {
    throw ShapeError("model sizes must all be positive");
  }
}

std::vector<std::pair<std::string, Tensor>> ModelParams::Named() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("tconv.kernel", tconv_kernel);
  out.emplace_back("tconv.bias", tconv_bias);
  auto add_stack = [&out](const std::string& prefix,
                          const std::vector<GruLayerParams>& stack) {
    for (std::size_t l = 0; l < stack.size(); ++l) {
      const std::string base = prefix + "." + std::to_string(l) + ".";
      auto w = stack[l].weights();
      auto b = stack[l].biases();
      for (std::size_t i = 0; i < 6; ++i) {
        out.emplace_back(base + std::string(GruLayerParams::WeightNames()[i]), w[i]);
      }
      for (std::size_t i = 0; i < 6; ++i) {
        out.emplace_back(base + std::string(GruLayerParams::BiasNames()[i]), b[i]);
      }
    }
  };
  add_stack("gru_kws", gru_kws);
  add_stack("gru_sv", gru_sv);
  out.emplace_back("head_kws.weight", head_kws_w);
  out.emplace_back("head_kws.bias", head_kws_b);
  out.emplace_back("head_sv.weight", head_sv_w);
  out.emplace_back("head_sv.bias", head_sv_b);
  return out;
}

namespace {

Tensor CloneParam(const Tensor& t) {
  Tensor c = t.Clone();
  c.set_requires_grad(t.requires_grad());
  return c;
}

GruLayerParams CloneLayer(const GruLayerParams& p) {
  GruLayerParams c;
  c.w_ir = CloneParam(p.w_ir);
  c.w_iz = CloneParam(p.w_iz);
  c.w_in = CloneParam(p.w_in);
  c.w_hr = CloneParam(p.w_hr);
  c.w_hz = CloneParam(p.w_hz);
  c.w_hn = CloneParam(p.w_hn);
  c.b_ir = CloneParam(p.b_ir);
  c.b_iz = CloneParam(p.b_iz);
  c.b_in = CloneParam(p.b_in);
  c.b_hr = CloneParam(p.b_hr);
  c.b_hz = CloneParam(p.b_hz);
  c.b_hn = CloneParam(p.b_hn);
  return c;
}

void FillGlorot(Tensor* t, std::size_t fan_in, std::size_t fan_out, Rng* rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t->data()) v = Uniform(rng, -bound, bound);
}

}  // namespace

ModelParams ModelParams::Clone() const {
  ModelParams c;
  c.tconv_kernel = CloneParam(tconv_kernel);
  c.tconv_bias = CloneParam(tconv_bias);
  for (const auto& l : gru_kws) c.gru_kws.push_back(CloneLayer(l));
  for (const auto& l : gru_sv) c.gru_sv.push_back(CloneLayer(l));
  c.head_kws_w = CloneParam(head_kws_w);
  c.head_kws_b = CloneParam(head_kws_b);
  c.head_sv_w = CloneParam(head_sv_w);
  c.head_sv_b = CloneParam(head_sv_b);
  return c;
}

void ModelParams::ZeroGrad() {
  for (auto& [name, t] : Named()) t.ZeroGrad();
}

ModelParams InitParams(const ModelConfig& config, uint64_t seed) {
  config.Validate();
  Rng rng = MakeRng(seed, "init");
  ModelParams p;
  const std::size_t ch = config.tconv_channels, width = config.tconv_width;
  p.tconv_kernel = Tensor::Zeros({ch, config.input_dim, width}, true);
  FillGlorot(&p.tconv_kernel, config.input_dim * width, ch * width, &rng);
  p.tconv_bias = Tensor::Zeros({ch}, true);
  for (auto* stack : {&p.gru_kws, &p.gru_sv}) {
    for (std::size_t l = 0; l < config.gru_layers; ++l) {
      std::size_t input = l == 0 ? ch : config.hidden;
      stack->push_back(GruLayerParams::Glorot(input, config.hidden, &rng));
    }
  }
  p.head_kws_w = Tensor::Zeros({config.num_keywords, config.hidden}, true);
  FillGlorot(&p.head_kws_w, config.hidden, config.num_keywords, &rng);
  p.head_kws_b = Tensor::Zeros({config.num_keywords}, true);
  p.head_sv_w = Tensor::Zeros({config.num_speakers, config.hidden}, true);
  FillGlorot(&p.head_sv_w, config.hidden, config.num_speakers, &rng);
  p.head_sv_b = Tensor::Zeros({config.num_speakers}, true);
  return p;
}

namespace {

BranchOutput RunBranch(Tape* tape, const std::vector<GruLayerParams>& stack,
                       const Tensor& head_w, const Tensor& head_b,
                       const Tensor& shared) {
  Tensor h = shared;
  for (const GruLayerParams& layer : stack) h = GruSequence(tape, layer, h);
  BranchOutput out;
  out.embedding = MeanOverTime(tape, h);
  out.logits = AddBias(tape, MatMulNT(tape, out.embedding, head_w), head_b);
  return out;
}

}  // namespace

ModelOutput Forward(Tape* tape, const ModelParams& params, const Tensor& features) {
  if (features.rank() != 3 || features.dim(1) == 0) {
    throw ShapeError("Forward expects [batch, frames > 0, dim] features, got " +
                     ShapeString(features.shape()));
  }
  Tensor shared = Relu(tape, Conv1d(tape, features, params.tconv_kernel, params.tconv_bias));
  ModelOutput out;
  out.kws = RunBranch(tape, params.gru_kws, params.head_kws_w, params.head_kws_b, shared);
  out.sv = RunBranch(tape, params.gru_sv, params.head_sv_w, params.head_sv_b, shared);
  return out;
}

ModelOutput Forward(const ModelParams& params, const FeatureMatrix& features) {
  const FeatureMatrix* one[] = {&features};
  Tape tape(false);
  return Forward(&tape, params, StackFeatures(one));
}

Tensor StackFeatures(std::span<const FeatureMatrix* const> batch) {
  if (batch.empty()) throw ShapeError("StackFeatures on an empty batch");
  const std::size_t frames = batch[0]->num_frames, dim = batch[0]->dim;
  std::vector<double> values;
  values.reserve(batch.size() * frames * dim);
  for (const FeatureMatrix* f : batch) {
    if (f->num_frames != frames || f->dim != dim) {
      throw ShapeError("StackFeatures: " + ShapeString({f->num_frames, f->dim}) +
                       " vs " + ShapeString({frames, dim}));
    }
    values.insert(values.end(), f->values.begin(), f->values.end());
  }
  return Tensor::FromData({batch.size(), frames, dim}, std::move(values));
}

}  // namespace orthospot
