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

// Feed-forward document scorer with hand-derived reverse-mode gradients.
//
// A network is an ordered list of layers. Each layer computes
//
//   z = x W^T + b;  [z = gamma * (z - mean) / sqrt(var + eps) + beta];  a(z)
//
// where the bracketed batch normalization is optional and the activation a is
// ReLU, CELU(alpha = 1) or the identity. The last layer has a single output
// unit: its column is the score vector of the query.
//
// Training-mode forward passes normalize with statistics of the current batch
// (one query's documents) and leave a cache for `backward`. Evaluation-mode
// passes use the running statistics and are pure.

#ifndef RANKFORGE_NETWORK_H_
#define RANKFORGE_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankforge/matrix.h"

namespace rankforge {

enum class Activation { kReLU, kCELU, kLinear };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::kLinear;
  bool batchnorm = false;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// The four five-layer settings: ReLU or CELU everywhere (R5, CE5), or in the
// first four layers with a linear output layer (R4.L, CE4.L).
enum class Architecture { kR5, kCE5, kR4L, kCE4L };

std::string_view to_string(Architecture arch);
// Throws ConfigError for unknown codes.
Architecture parse_architecture(std::string_view code);

inline constexpr std::size_t kDefaultHiddenWidth = 100;
inline constexpr double kCeluAlpha = 1.0;
inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

// Batch normalization after every hidden affine map, none on the output.
std::vector<LayerSpec> architecture_layers(
    Architecture arch, std::size_t input_dim,
    std::size_t hidden = kDefaultHiddenWidth);

// Trainable tensors of one layer. gamma/beta are empty without batchnorm.
struct LayerParams {
  DenseMatrix weight;  // out_dim x in_dim
  std::vector<double> bias;
  std::vector<double> gamma;
  std::vector<double> beta;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};
using ParamSet = std::vector<LayerParams>;

ParamSet zeros_like(const ParamSet& params);
// Flat views over every tensor, in a fixed order (weight, bias, gamma, beta
// per layer).
std::vector<std::span<double>> tensors(ParamSet& params);
std::vector<std::span<const double>> tensors(const ParamSet& params);
bool same_shape(const ParamSet& a, const ParamSet& b);

struct BatchNormStats {
  std::vector<double> mean;
  std::vector<double> var;

  friend bool operator==(const BatchNormStats&,
                         const BatchNormStats&) = default;
};

class Network {
 public:
  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases and beta 0,
  // gamma 1, running mean 0 and running variance 1.
  Network(std::vector<LayerSpec> layers, std::uint64_t seed);
  static Network from_architecture(Architecture arch, std::size_t input_dim,
                                   std::uint64_t seed,
                                   std::size_t hidden = kDefaultHiddenWidth);
  // Used by the checkpoint reader; validates shapes.
  Network(std::vector<LayerSpec> layers, ParamSet params,
          std::vector<BatchNormStats> running,
          std::optional<Architecture> arch);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t input_dim() const { return layers_.front().in_dim; }
  std::optional<Architecture> architecture() const { return arch_; }

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  // Entry i is empty for layers without batchnorm.
  std::vector<BatchNormStats>& running_stats() { return running_; }
  const std::vector<BatchNormStats>& running_stats() const { return running_; }

  // Bumped by every optimizer step; caches from older generations are stale.
  std::uint64_t generation() const { return generation_; }
  void bump_generation() { ++generation_; }

  friend bool operator==(const Network& a, const Network& b) {
    return a.layers_ == b.layers_ && a.params_ == b.params_ &&
           a.running_ == b.running_ && a.arch_ == b.arch_;
  }

 private:
  void validate() const;

  std::vector<LayerSpec> layers_;
  ParamSet params_;
  std::vector<BatchNormStats> running_;
  std::optional<Architecture> arch_;
  std::uint64_t generation_ = 0;
};

enum class Mode { kTrain, kEval };

struct LayerCache {
  DenseMatrix input;
  DenseMatrix normalized;  // x-hat, batchnorm layers only
  DenseMatrix pre_activation;
  std::vector<double> batch_mean;
  std::vector<double> batch_var;  // population variance
  std::vector<double> inv_std;
};

struct ForwardCache {
  Mode mode = Mode::kEval;
  std::uint64_t generation = 0;
  std::vector<LayerCache> layers;
};

struct ForwardResult {
  std::vector<double> scores;
  ForwardCache cache;
};

// Pure: never touches running statistics. Throws InputError on a feature
// dimension mismatch or empty batch, NumericError on non-finite activations.
ForwardResult forward(const Network& net, const DenseMatrix& features,
                      Mode mode);

// Folds the batch statistics of a training-mode cache into the running
// statistics with the given momentum. Running variance uses the unbiased
// estimate; single-row batches update the mean only.
void update_running_stats(Network& net, const ForwardCache& cache,
                          double momentum = kBatchNormMomentum);

// forward(kTrain) followed by update_running_stats.
ForwardResult train_forward(Network& net, const DenseMatrix& features);

// Eval-mode scores.
std::vector<double> score(const Network& net, const DenseMatrix& features);

// Gradients of a scalar loss with respect to every parameter, given
// dL/dscores. Throws UsageError when the cache is not from a training-mode
// pass of this network at its current generation.
ParamSet backward(const Network& net, const ForwardCache& cache,
                  std::span<const double> grad_scores);

}  // namespace rankforge

#endif  // RANKFORGE_NETWORK_H_
