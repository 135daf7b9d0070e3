/*
 * Copyright 2026 The rankforge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rankforge/network.h"

#include <cmath>
#include <string>
#include <utility>

#include "rankforge/errors.h"
#include "rankforge/rng.h"

namespace rankforge {
namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kReLU:
      return z > 0.0 ? z : 0.0;
    case Activation::kCELU:
      return z > 0.0 ? z : kCeluAlpha * std::expm1(z / kCeluAlpha);
    case Activation::kLinear:
      return z;
  }
  return z;
}

double activate_grad(Activation a, double z) {
  switch (a) {
    case Activation::kReLU:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kCELU:
      return z > 0.0 ? 1.0 : std::exp(z / kCeluAlpha);
    case Activation::kLinear:
      return 1.0;
  }
  return 1.0;
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kReLU:
      return "relu";
    case Activation::kCELU:
      return "celu";
    case Activation::kLinear:
      return "linear";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kReLU;
  if (name == "celu") return Activation::kCELU;
  if (name == "linear") return Activation::kLinear;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Architecture arch) {
  switch (arch) {
    case Architecture::kR5:
      return "R5";
    case Architecture::kCE5:
      return "CE5";
    case Architecture::kR4L:
      return "R4.L";
    case Architecture::kCE4L:
      return "CE4.L";
  }
  return "?";
}

Architecture parse_architecture(std::string_view code) {
  if (code == "R5") return Architecture::kR5;
  if (code == "CE5") return Architecture::kCE5;
  if (code == "R4.L") return Architecture::kR4L;
  if (code == "CE4.L") return Architecture::kCE4L;
  throw ConfigError("unknown architecture '" + std::string(code) +
                    "' (expected R5, CE5, R4.L or CE4.L)");
}

std::vector<LayerSpec> architecture_layers(Architecture arch,
                                           std::size_t input_dim,
                                           std::size_t hidden) {
  if (input_dim == 0 || hidden == 0) {
    throw InputError("architecture_layers: dimensions must be >= 1");
  }
  const bool relu = arch == Architecture::kR5 || arch == Architecture::kR4L;
  const Activation act = relu ? Activation::kReLU : Activation::kCELU;
  const bool linear_head =
      arch == Architecture::kR4L || arch == Architecture::kCE4L;

  constexpr int kDepth = 5;
  std::vector<LayerSpec> layers;
  std::size_t in = input_dim;
  for (int i = 0; i < kDepth; ++i) {
    const bool last = i == kDepth - 1;
    LayerSpec spec;
    spec.in_dim = in;
    spec.out_dim = last ? 1 : hidden;
    spec.activation = last && linear_head ? Activation::kLinear : act;
    spec.batchnorm = !last;
    layers.push_back(spec);
    in = spec.out_dim;
  }
  return layers;
}

ParamSet zeros_like(const ParamSet& params) {
  ParamSet out;
  out.reserve(params.size());
  for (const auto& p : params) {
    LayerParams z;
    z.weight = DenseMatrix(p.weight.rows(), p.weight.cols());
    z.bias.assign(p.bias.size(), 0.0);
    z.gamma.assign(p.gamma.size(), 0.0);
    z.beta.assign(p.beta.size(), 0.0);
    out.push_back(std::move(z));
  }
  return out;
}

std::vector<std::span<double>> tensors(ParamSet& params) {
  std::vector<std::span<double>> out;
  for (auto& p : params) {
    out.emplace_back(p.weight.values());
    out.emplace_back(p.bias);
    if (!p.gamma.empty()) {
      out.emplace_back(p.gamma);
      out.emplace_back(p.beta);
    }
  }
  return out;
}

std::vector<std::span<const double>> tensors(const ParamSet& params) {
  std::vector<std::span<const double>> out;
  for (const auto& p : params) {
    out.emplace_back(p.weight.values());
    out.emplace_back(p.bias);
    if (!p.gamma.empty()) {
      out.emplace_back(p.gamma);
      out.emplace_back(p.beta);
    }
  }
  return out;
}

bool same_shape(const ParamSet& a, const ParamSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].weight.rows() != b[i].weight.rows() ||
        a[i].weight.cols() != b[i].weight.cols() ||
        a[i].bias.size() != b[i].bias.size() ||
        a[i].gamma.size() != b[i].gamma.size() ||
        a[i].beta.size() != b[i].beta.size()) {
      return false;
    }
  }
  return true;
}

Network::Network(std::vector<LayerSpec> layers, std::uint64_t seed)
    : layers_(std::move(layers)) {
  if (layers_.empty()) throw InputError("Network: no layers");
  Rng rng(seed);
  for (const auto& spec : layers_) {
    if (spec.in_dim == 0 || spec.out_dim == 0) {
      throw InputError("Network: layer dimensions must be >= 1");
    }
    LayerParams p;
    const double limit =
        std::sqrt(6.0 / static_cast<double>(spec.in_dim + spec.out_dim));
    p.weight = DenseMatrix(spec.out_dim, spec.in_dim);
    for (double& w : p.weight.values()) {
      w = (2.0 * uniform01(rng) - 1.0) * limit;
    }
    p.bias.assign(spec.out_dim, 0.0);
    BatchNormStats stats;
    if (spec.batchnorm) {
      p.gamma.assign(spec.out_dim, 1.0);
      p.beta.assign(spec.out_dim, 0.0);
      stats.mean.assign(spec.out_dim, 0.0);
      stats.var.assign(spec.out_dim, 1.0);
    }
    params_.push_back(std::move(p));
    running_.push_back(std::move(stats));
  }
  validate();
}

Network Network::from_architecture(Architecture arch, std::size_t input_dim,
                                   std::uint64_t seed, std::size_t hidden) {
  Network net(architecture_layers(arch, input_dim, hidden), seed);
  net.arch_ = arch;
  return net;
}

Network::Network(std::vector<LayerSpec> layers, ParamSet params,
                 std::vector<BatchNormStats> running,
                 std::optional<Architecture> arch)
    : layers_(std::move(layers)),
      params_(std::move(params)),
      running_(std::move(running)),
      arch_(arch) {
  validate();
}

void Network::validate() const {
  if (layers_.empty()) throw InputError("Network: no layers");
  if (params_.size() != layers_.size() || running_.size() != layers_.size()) {
    throw InputError("Network: parameter count does not match layer count");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& spec = layers_[i];
    if (i > 0 && layers_[i - 1].out_dim != spec.in_dim) {
      throw InputError("Network: layer " + std::to_string(i) +
                       " input does not chain with previous output");
    }
    const auto& p = params_[i];
    const std::size_t bn = spec.batchnorm ? spec.out_dim : 0;
    if (p.weight.rows() != spec.out_dim || p.weight.cols() != spec.in_dim ||
        p.bias.size() != spec.out_dim || p.gamma.size() != bn ||
        p.beta.size() != bn || running_[i].mean.size() != bn ||
        running_[i].var.size() != bn) {
      throw InputError("Network: tensor shapes of layer " +
                       std::to_string(i) + " do not match its spec");
    }
  }
  if (layers_.back().out_dim != 1) {
    throw InputError("Network: output layer must have exactly one unit");
  }
}

ForwardResult forward(const Network& net, const DenseMatrix& features,
                      Mode mode) {
  if (features.rows() == 0) throw InputError("forward: empty batch");
  if (features.cols() != net.input_dim()) {
    throw InputError("forward: feature dimension " +
                     std::to_string(features.cols()) + " != network input " +
                     std::to_string(net.input_dim()));
  }
  ForwardResult result;
  result.cache.mode = mode;
  result.cache.generation = net.generation();

  const std::size_t m = features.rows();
  const double inv_m = 1.0 / static_cast<double>(m);
  DenseMatrix x = features;
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    const auto& spec = net.layers()[li];
    const auto& p = net.params()[li];
    LayerCache lc;
    DenseMatrix z = affine(x, p.weight, p.bias);
    if (spec.batchnorm) {
      const std::size_t n = spec.out_dim;
      std::vector<double> mean(n), var(n), inv_std(n);
      if (mode == Mode::kTrain) {
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t c = 0; c < n; ++c) mean[c] += z(r, c);
        }
        for (auto& v : mean) v *= inv_m;
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t c = 0; c < n; ++c) {
            const double d = z(r, c) - mean[c];
            var[c] += d * d;
          }
        }
        for (auto& v : var) v *= inv_m;
      } else {
        mean = net.running_stats()[li].mean;
        var = net.running_stats()[li].var;
      }
      for (std::size_t c = 0; c < n; ++c) {
        inv_std[c] = 1.0 / std::sqrt(var[c] + kBatchNormEpsilon);
      }
      DenseMatrix xhat(m, n);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          xhat(r, c) = (z(r, c) - mean[c]) * inv_std[c];
          z(r, c) = p.gamma[c] * xhat(r, c) + p.beta[c];
        }
      }
      if (mode == Mode::kTrain) {
        lc.normalized = std::move(xhat);
        lc.batch_mean = std::move(mean);
        lc.batch_var = std::move(var);
        lc.inv_std = std::move(inv_std);
      }
    }
    DenseMatrix out(z.rows(), z.cols());
    {
      auto src = z.values();
      auto dst = out.values();
      for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = activate(spec.activation, src[i]);
      }
    }
    if (!out.all_finite()) {
      throw NumericError("forward: non-finite activation in layer " +
                         std::to_string(li));
    }
    if (mode == Mode::kTrain) {
      lc.input = std::move(x);
      lc.pre_activation = std::move(z);
      result.cache.layers.push_back(std::move(lc));
    }
    x = std::move(out);
  }
  result.scores.assign(x.values().begin(), x.values().end());
  return result;
}

void update_running_stats(Network& net, const ForwardCache& cache,
                          double momentum) {
  if (cache.mode != Mode::kTrain ||
      cache.layers.size() != net.layers().size()) {
    throw UsageError("update_running_stats: needs a training-mode cache");
  }
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    if (!net.layers()[li].batchnorm) continue;
    const auto& lc = cache.layers[li];
    auto& stats = net.running_stats()[li];
    const std::size_t m = lc.input.rows();
    for (std::size_t c = 0; c < stats.mean.size(); ++c) {
      stats.mean[c] =
          (1.0 - momentum) * stats.mean[c] + momentum * lc.batch_mean[c];
      if (m > 1) {
        const double unbiased = lc.batch_var[c] * static_cast<double>(m) /
                                static_cast<double>(m - 1);
        stats.var[c] = (1.0 - momentum) * stats.var[c] + momentum * unbiased;
      }
    }
  }
}

ForwardResult train_forward(Network& net, const DenseMatrix& features) {
  ForwardResult result = forward(net, features, Mode::kTrain);
  update_running_stats(net, result.cache);
  return result;
}

std::vector<double> score(const Network& net, const DenseMatrix& features) {
  return forward(net, features, Mode::kEval).scores;
}

ParamSet backward(const Network& net, const ForwardCache& cache,
                  std::span<const double> grad_scores) {
  if (cache.mode != Mode::kTrain) {
    throw UsageError("backward: cache comes from an eval-mode pass");
  }
  if (cache.generation != net.generation() ||
      cache.layers.size() != net.layers().size()) {
    throw UsageError("backward: stale or foreign forward cache");
  }
  const std::size_t m = cache.layers.front().input.rows();
  if (grad_scores.size() != m) {
    throw UsageError("backward: gradient length " +
                     std::to_string(grad_scores.size()) +
                     " != batch size " + std::to_string(m));
  }

  ParamSet grads = zeros_like(net.params());
  DenseMatrix upstream(m, 1, std::vector<double>(grad_scores.begin(),
                                                 grad_scores.end()));
  for (std::size_t li = net.layers().size(); li-- > 0;) {
    const auto& spec = net.layers()[li];
    const auto& p = net.params()[li];
    const auto& lc = cache.layers[li];
    auto& g = grads[li];
    const std::size_t n = spec.out_dim;
    if (lc.pre_activation.rows() != m || lc.pre_activation.cols() != n) {
      throw UsageError("backward: cache shape does not match network");
    }

    DenseMatrix dz(m, n);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        dz(r, c) =
            upstream(r, c) * activate_grad(spec.activation,
                                           lc.pre_activation(r, c));
      }
    }

    if (spec.batchnorm) {
      // dz currently holds dL/d(bn output).
      std::vector<double> sum_dxhat(n, 0.0), sum_dxhat_xhat(n, 0.0);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          const double dy = dz(r, c);
          const double xh = lc.normalized(r, c);
          g.gamma[c] += dy * xh;
          g.beta[c] += dy;
          const double dxh = dy * p.gamma[c];
          sum_dxhat[c] += dxh;
          sum_dxhat_xhat[c] += dxh * xh;
        }
      }
      const double md = static_cast<double>(m);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          const double dxh = dz(r, c) * p.gamma[c];
          dz(r, c) = lc.inv_std[c] / md *
                     (md * dxh - sum_dxhat[c] -
                      lc.normalized(r, c) * sum_dxhat_xhat[c]);
        }
      }
    }

    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < n; ++c) g.bias[c] += dz(r, c);
    }
    accumulate_outer(dz, lc.input, g.weight);
    if (li > 0) upstream = matmul(dz, p.weight);
  }
  return grads;
}

}  // namespace rankforge
