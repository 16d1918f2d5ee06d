// Copyright 2026 The RMT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rmt/tasks.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace rmt {
namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return SplitMix64(SplitMix64(SplitMix64(seed) ^ a) ^ b);
}

double TaskSet::Loss(int task, const Eigen::VectorXd& params) const {
  return Evaluate(task, params, EvalContext{}).loss;
}

std::vector<double> TaskSet::TaskSizes() const {
  return std::vector<double>(static_cast<std::size_t>(num_tasks()), 1.0);
}

void TaskSet::CheckTask(int task) const {
  if (task < 0 || task >= num_tasks()) {
    throw std::out_of_range("task index " + std::to_string(task) + " out of range");
  }
}

PolarParams PolarParams::FromVector(const Eigen::VectorXd& v) {
  if (v.size() != 2) throw std::invalid_argument("polar parameters have two entries");
  return PolarParams{v[0], v[1]};
}

// Geometric family.

GeometricTaskSet::GeometricTaskSet(const GeometricOptions& options)
    : outlier_index_(options.num_cluster), radius_(options.radius), init_(options.init) {
  if (options.num_cluster < 0) throw std::invalid_argument("cluster size must be >= 0");
  if (!(options.radius > 0.0)) throw std::invalid_argument("radius must be positive");
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < options.num_cluster; ++i) {
    const double rho = options.cluster_radius * std::sqrt(unit(rng));
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    targets_.push_back(options.cluster_center +
                       rho * Eigen::Vector2d(std::cos(angle), std::sin(angle)));
  }
  targets_.push_back(options.outlier);
}

GeometricTaskSet::GeometricTaskSet(std::vector<Eigen::Vector2d> targets, int outlier_index,
                                   double radius, PolarParams init)
    : targets_(std::move(targets)), outlier_index_(outlier_index), radius_(radius), init_(init) {
  if (!(radius_ > 0.0)) throw std::invalid_argument("radius must be positive");
  if (outlier_index_ < 0 || outlier_index_ >= num_tasks()) {
    throw std::invalid_argument("outlier index out of range");
  }
  for (int i = 0; i < num_tasks(); ++i) {
    if (i != outlier_index_ && targets_[i] == targets_[outlier_index_]) {
      throw std::invalid_argument("outlier target must be distinct");
    }
  }
}

Eigen::Vector2d GeometricTaskSet::Position(const PolarParams& theta) const {
  return targets_[outlier_index_] +
         (radius_ + theta.r * theta.r) * Eigen::Vector2d(std::cos(theta.phi), std::sin(theta.phi));
}

double GeometricTaskSet::Loss(const PolarParams& theta, int task) const {
  CheckTask(task);
  return (targets_[task] - Position(theta)).squaredNorm();
}

Eigen::Vector2d GeometricTaskSet::Gradient(const PolarParams& theta, int task) const {
  CheckTask(task);
  const Eigen::Vector2d direction(std::cos(theta.phi), std::sin(theta.phi));
  const Eigen::Vector2d tangent(-std::sin(theta.phi), std::cos(theta.phi));
  const Eigen::Vector2d residual = 2.0 * (Position(theta) - targets_[task]);
  const Eigen::Vector2d d_dr = 2.0 * theta.r * direction;
  const Eigen::Vector2d d_dphi = (radius_ + theta.r * theta.r) * tangent;
  return Eigen::Vector2d(residual.dot(d_dr), residual.dot(d_dphi));
}

TaskEvaluation GeometricTaskSet::Evaluate(int task, const Eigen::VectorXd& params,
                                          const EvalContext&) const {
  const PolarParams theta = PolarParams::FromVector(params);
  return TaskEvaluation{Loss(theta, task), Gradient(theta, task)};
}

double GeometricTaskSet::Loss(int task, const Eigen::VectorXd& params) const {
  return Loss(PolarParams::FromVector(params), task);
}

Eigen::VectorXd GeometricTaskSet::InitialParams(std::uint64_t) const {
  return init_.ToVector();
}

// Classification family.

ClassificationTaskSet::ClassificationTaskSet(const ClassificationOptions& options)
    : classes_(options.num_classes), dim_(options.input_dim) {
  if (options.num_tasks < 1 || classes_ < 2 || dim_ < 1) {
    throw std::invalid_argument("classification family needs tasks, >= 2 classes and inputs");
  }
  if (options.examples_per_class < 1 || options.heldout_per_class < 1 ||
      options.min_examples_per_class < 1) {
    throw std::invalid_argument("example counts must be positive");
  }
  if (!(options.conflict >= 0.0 && options.conflict <= 1.0)) {
    throw std::invalid_argument("conflict must lie in [0, 1]");
  }
  if (!(options.size_decay > 0.0 && options.size_decay <= 1.0)) {
    throw std::invalid_argument("size_decay must lie in (0, 1]");
  }

  std::mt19937_64 rng(options.data_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
    }
    return m;
  };

  const Eigen::MatrixXd shared = gaussian(classes_, dim_);
  const double shared_scale = std::sqrt(1.0 - options.conflict * options.conflict);
  auto sample = [&](const Eigen::MatrixXd& means, int per_class) {
    Dataset data;
    data.inputs.resize(static_cast<Eigen::Index>(per_class) * classes_, dim_);
    data.labels.reserve(static_cast<std::size_t>(per_class) * classes_);
    Eigen::Index row = 0;
    for (int c = 0; c < classes_; ++c) {
      for (int k = 0; k < per_class; ++k, ++row) {
        for (int j = 0; j < dim_; ++j) data.inputs(row, j) = means(c, j) + normal(rng);
        data.labels.push_back(c);
      }
    }
    return data;
  };

  for (int t = 0; t < options.num_tasks; ++t) {
    const double frac = options.num_tasks > 1 ? static_cast<double>(t) / (options.num_tasks - 1) : 0.0;
    const double separation =
        options.max_separation - (options.max_separation - options.min_separation) * frac;
    const Eigen::MatrixXd means =
        separation * (shared_scale * shared + options.conflict * gaussian(classes_, dim_));
    const int per_class = std::max(
        options.min_examples_per_class,
        static_cast<int>(std::lround(options.examples_per_class * std::pow(options.size_decay, t))));
    train_.push_back(sample(means, per_class));
    heldout_.push_back(sample(means, options.heldout_per_class));
  }
}

TaskEvaluation ClassificationTaskSet::LossAndGradient(const Dataset& data,
                                                      const Eigen::VectorXd& params) const {
  if (params.size() != num_params()) throw std::invalid_argument("parameter size mismatch");
  const Eigen::Map<const RowMajorMatrix> weights(params.data(), classes_, dim_);
  const auto bias = params.tail(classes_);
  const auto n = data.inputs.rows();

  Eigen::MatrixXd probs = data.inputs * weights.transpose();
  probs.rowwise() += bias.transpose();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double shift = probs.row(i).maxCoeff();
    probs.row(i).array() = (probs.row(i).array() - shift).exp();
    const double total = probs.row(i).sum();
    probs.row(i) /= total;
    loss -= std::log(probs(i, data.labels[i]));
    probs(i, data.labels[i]) -= 1.0;  // now dL/dlogits * n
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  TaskEvaluation out;
  out.loss = loss * inv_n;
  out.gradient.resize(num_params());
  Eigen::Map<RowMajorMatrix> grad_w(out.gradient.data(), classes_, dim_);
  grad_w = inv_n * probs.transpose() * data.inputs;
  out.gradient.tail(classes_) = inv_n * probs.colwise().sum().transpose();
  return out;
}

double ClassificationTaskSet::Accuracy(const Dataset& data, const Eigen::VectorXd& params) const {
  if (params.size() != num_params()) throw std::invalid_argument("parameter size mismatch");
  const Eigen::Map<const RowMajorMatrix> weights(params.data(), classes_, dim_);
  Eigen::MatrixXd logits = data.inputs * weights.transpose();
  logits.rowwise() += params.tail(classes_).transpose();
  int correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    if (static_cast<int>(best) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

TaskEvaluation ClassificationTaskSet::Evaluate(int task, const Eigen::VectorXd& params,
                                               const EvalContext& context) const {
  CheckTask(task);
  const Dataset& full = train_[task];
  const auto n = static_cast<int>(full.inputs.rows());
  if (context.batch_size <= 0 || context.batch_size >= n) {
    return LossAndGradient(full, params);
  }
  // Partial Fisher-Yates draw of a batch without replacement.
  std::mt19937_64 rng(MixSeed(context.seed, static_cast<std::uint64_t>(context.step),
                              static_cast<std::uint64_t>(task)));
  std::vector<int> index(n);
  for (int i = 0; i < n; ++i) index[i] = i;
  Dataset batch;
  batch.inputs.resize(context.batch_size, dim_);
  batch.labels.resize(context.batch_size);
  for (int k = 0; k < context.batch_size; ++k) {
    std::uniform_int_distribution<int> pick(k, n - 1);
    std::swap(index[k], index[pick(rng)]);
    batch.inputs.row(k) = full.inputs.row(index[k]);
    batch.labels[k] = full.labels[index[k]];
  }
  return LossAndGradient(batch, params);
}

double ClassificationTaskSet::Loss(int task, const Eigen::VectorXd& params) const {
  CheckTask(task);
  return LossAndGradient(train_[task], params).loss;
}

std::optional<double> ClassificationTaskSet::Metric(int task,
                                                    const Eigen::VectorXd& params) const {
  CheckTask(task);
  return Accuracy(heldout_[task], params);
}

std::vector<double> ClassificationTaskSet::TaskSizes() const {
  std::vector<double> sizes;
  for (const Dataset& d : train_) sizes.push_back(static_cast<double>(d.inputs.rows()));
  return sizes;
}

Eigen::VectorXd ClassificationTaskSet::InitialParams(std::uint64_t seed) const {
  std::mt19937_64 rng(MixSeed(seed, 0x1417));
  std::normal_distribution<double> normal(0.0, 0.01);
  Eigen::VectorXd params(num_params());
  for (Eigen::Index i = 0; i < params.size(); ++i) params[i] = normal(rng);
  return params;
}

// Noise wrapper.

NoisyTaskSet::NoisyTaskSet(std::shared_ptr<const TaskSet> inner, double sigma_loss,
                           double sigma_grad, std::uint64_t seed)
    : inner_(std::move(inner)), sigma_loss_(sigma_loss), sigma_grad_(sigma_grad), seed_(seed) {
  if (!inner_) throw std::invalid_argument("noisy task set needs an inner task set");
  if (!(sigma_loss_ >= 0.0) || !(sigma_grad_ >= 0.0)) {
    throw std::invalid_argument("noise scales must be non-negative");
  }
}

TaskEvaluation NoisyTaskSet::Evaluate(int task, const Eigen::VectorXd& params,
                                      const EvalContext& context) const {
  TaskEvaluation out = inner_->Evaluate(task, params, context);
  if (sigma_loss_ == 0.0 && sigma_grad_ == 0.0) return out;
  std::mt19937_64 rng(MixSeed(seed_, static_cast<std::uint64_t>(context.step),
                              static_cast<std::uint64_t>(task)));
  std::normal_distribution<double> normal(0.0, 1.0);
  out.loss += sigma_loss_ * normal(rng);
  for (Eigen::Index i = 0; i < out.gradient.size(); ++i) {
    out.gradient[i] += sigma_grad_ * normal(rng);
  }
  return out;
}

}  // namespace rmt
