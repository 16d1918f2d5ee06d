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

#ifndef RMT_TASKS_H_
#define RMT_TASKS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace rmt {

struct TaskEvaluation {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

// Where in training an evaluation happens. Stochastic task sets key their
// randomness on (seed, step, task) so evaluations are reproducible and
// independent of evaluation order.
struct EvalContext {
  std::int64_t step = 0;
  int batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;
};

// A collection of task losses over one shared parameter vector.
class TaskSet {
 public:
  virtual ~TaskSet() = default;

  virtual int num_tasks() const = 0;
  virtual int num_params() const = 0;

  // Training loss and gradient of `task` at `params`.
  virtual TaskEvaluation Evaluate(int task, const Eigen::VectorXd& params,
                                  const EvalContext& context) const = 0;

  // Noise-free full-batch training loss.
  virtual double Loss(int task, const Eigen::VectorXd& params) const;

  // Held-out metric (higher is better), when the family defines one.
  virtual std::optional<double> Metric(int /*task*/, const Eigen::VectorXd& /*params*/) const {
    return std::nullopt;
  }

  // Per-task dataset sizes, used by temperature mixing.
  virtual std::vector<double> TaskSizes() const;

  virtual Eigen::VectorXd InitialParams(std::uint64_t seed) const = 0;

  // Whether checkpoints keep full parameter snapshots.
  virtual bool SnapshotParams() const { return false; }

 protected:
  void CheckTask(int task) const;
};

// Model parameters of the geometric family, theta = (r, phi).
struct PolarParams {
  double r = 0.0;
  double phi = 0.0;

  Eigen::VectorXd ToVector() const { return Eigen::Vector2d(r, phi); }
  static PolarParams FromVector(const Eigen::VectorXd& v);
};

struct GeometricOptions {
  int num_cluster = 9;
  double cluster_radius = 0.25;
  Eigen::Vector2d cluster_center{-1.0, 0.0};
  Eigen::Vector2d outlier{1.0, 0.0};
  double radius = 1.25;  // forbidden-region radius R
  std::uint64_t seed = 7;
  PolarParams init{1.0, 2.0};
};

// Tasks are points y_i in the plane with loss ||y_i - f(theta)||^2, where
//   f(theta) = y_outlier + (R + r^2) [cos phi, sin phi].
// The model can never come closer than R to the outlier, so the outlier loss
// is bounded below by R^2. The outlier is the last task.
class GeometricTaskSet final : public TaskSet {
 public:
  explicit GeometricTaskSet(const GeometricOptions& options = {});
  GeometricTaskSet(std::vector<Eigen::Vector2d> targets, int outlier_index, double radius,
                   PolarParams init = {1.0, 2.0});

  int num_tasks() const override { return static_cast<int>(targets_.size()); }
  int num_params() const override { return 2; }
  TaskEvaluation Evaluate(int task, const Eigen::VectorXd& params,
                          const EvalContext& context) const override;
  double Loss(int task, const Eigen::VectorXd& params) const override;
  Eigen::VectorXd InitialParams(std::uint64_t seed) const override;
  bool SnapshotParams() const override { return true; }

  Eigen::Vector2d Position(const PolarParams& theta) const;
  double Loss(const PolarParams& theta, int task) const;
  Eigen::Vector2d Gradient(const PolarParams& theta, int task) const;

  const std::vector<Eigen::Vector2d>& targets() const { return targets_; }
  int outlier_index() const { return outlier_index_; }
  double radius() const { return radius_; }

 private:
  std::vector<Eigen::Vector2d> targets_;
  int outlier_index_;
  double radius_;
  PolarParams init_;
};

struct ClassificationOptions {
  int num_tasks = 10;
  int num_classes = 5;
  int input_dim = 16;
  int examples_per_class = 200;  // training examples per class of the largest task
  int heldout_per_class = 100;
  // Task t has examples_per_class * size_decay^t examples per class, at
  // least min_examples_per_class.
  double size_decay = 0.79;
  int min_examples_per_class = 20;
  // Fraction of each task's class-mean geometry that is task specific; the
  // rest is shared across tasks.
  double conflict = 0.6;
  // Class separation falls linearly from the first (easiest) task to the last.
  double max_separation = 1.6;
  double min_separation = 0.6;
  std::uint64_t data_seed = 0;
};

// Each task is a C-way classification of Gaussian clusters. All tasks share a
// single linear-softmax layer (W, b), flattened as [W row-major, b].
class ClassificationTaskSet final : public TaskSet {
 public:
  explicit ClassificationTaskSet(const ClassificationOptions& options = {});

  int num_tasks() const override { return static_cast<int>(train_.size()); }
  int num_params() const override { return classes_ * (dim_ + 1); }
  TaskEvaluation Evaluate(int task, const Eigen::VectorXd& params,
                          const EvalContext& context) const override;
  double Loss(int task, const Eigen::VectorXd& params) const override;
  std::optional<double> Metric(int task, const Eigen::VectorXd& params) const override;
  std::vector<double> TaskSizes() const override;
  Eigen::VectorXd InitialParams(std::uint64_t seed) const override;

  struct Dataset {
    Eigen::MatrixXd inputs;  // one example per row
    std::vector<int> labels;
  };

  // Mean cross-entropy and its gradient on an arbitrary dataset.
  TaskEvaluation LossAndGradient(const Dataset& data, const Eigen::VectorXd& params) const;
  double Accuracy(const Dataset& data, const Eigen::VectorXd& params) const;

  const Dataset& train(int task) const { return train_.at(task); }
  const Dataset& heldout(int task) const { return heldout_.at(task); }
  int num_classes() const { return classes_; }

 private:
  int classes_;
  int dim_;
  std::vector<Dataset> train_;
  std::vector<Dataset> heldout_;
};

// Adds N(0, sigma_loss^2) to losses and i.i.d. N(0, sigma_grad^2) to gradient
// coordinates. Draws are keyed by (seed, step, task).
class NoisyTaskSet final : public TaskSet {
 public:
  NoisyTaskSet(std::shared_ptr<const TaskSet> inner, double sigma_loss, double sigma_grad,
               std::uint64_t seed);

  int num_tasks() const override { return inner_->num_tasks(); }
  int num_params() const override { return inner_->num_params(); }
  TaskEvaluation Evaluate(int task, const Eigen::VectorXd& params,
                          const EvalContext& context) const override;
  double Loss(int task, const Eigen::VectorXd& params) const override {
    return inner_->Loss(task, params);
  }
  std::optional<double> Metric(int task, const Eigen::VectorXd& params) const override {
    return inner_->Metric(task, params);
  }
  std::vector<double> TaskSizes() const override { return inner_->TaskSizes(); }
  Eigen::VectorXd InitialParams(std::uint64_t seed) const override {
    return inner_->InitialParams(seed);
  }
  bool SnapshotParams() const override { return inner_->SnapshotParams(); }

 private:
  std::shared_ptr<const TaskSet> inner_;
  double sigma_loss_;
  double sigma_grad_;
  std::uint64_t seed_;
};

// Deterministic 64-bit seed for a (seed, a, b) key.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace rmt

#endif  // RMT_TASKS_H_
