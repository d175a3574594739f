#ifndef DISSOLVE_MLP_HPP
#define DISSOLVE_MLP_HPP

#include "dissolve/lbfgs.hpp"
#include "dissolve/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dissolve {

struct MlpConfig {
  std::vector<int> hidden_layers = {64};
  double l2_alpha = 1e-4;
  int max_iter = 500;
  double grad_tol = 1e-6;
  int history_size = 10;
  std::uint64_t seed = 0;
};

/// Throws BadConfig on an empty layer list, non-positive widths or l2_alpha < 0.
void check_config(const MlpConfig& cfg);

/// Fully connected regressor: ReLU hidden layers, identity output layer.
/// weights[t] is fan_in x fan_out and multiplies row-vector activations.
struct MlpModel {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  MlpConfig config;
  double train_loss = 0.0;
  double initial_loss = 0.0;
  int n_iters = 0;
  bool converged = false;
  std::vector<Index> constant_targets;  // zero-variance Y columns seen in training

  Index input_dim() const { return weights.empty() ? 0 : weights.front().rows(); }
  Index output_dim() const { return weights.empty() ? 0 : weights.back().cols(); }
  Index n_parameters() const;
};

/// Uniform(-r, r) weights with r = sqrt(6 / (fan_in + fan_out)), zero biases.
MlpModel mlp_init(const MlpConfig& cfg, Index in_dim, Index out_dim);

Matrix forward(const MlpModel& m, const Matrix& X);

inline Matrix predict(const MlpModel& m, const Matrix& X) { return forward(m, X); }

/// Flattened parameters: per layer, the weight matrix (column-major) then its bias.
Vector pack_parameters(const MlpModel& m);
void unpack_parameters(MlpModel& m, const Vector& theta);

struct LossGrad {
  double loss = 0.0;
  double mse = 0.0;
  double penalty = 0.0;
  Vector grad;  // same layout as pack_parameters
};

/// mean((Y_hat - Y)^2) + l2_alpha * 0.5 * ||W||^2 / n_samples (weights only).
LossGrad loss_and_grad(const MlpModel& m, const Matrix& X, const Matrix& Y);

/// Trains from mlp_init(cfg) by L-BFGS. Deterministic for a fixed seed and data.
MlpModel train(const MlpConfig& cfg, const Matrix& X, const Matrix& Y);

/// Mean squared prediction error without the penalty.
double mse(const MlpModel& m, const Matrix& X, const Matrix& Y);

void save_mlp(const MlpModel& m, const std::filesystem::path& path);
MlpModel load_mlp(const std::filesystem::path& path);

}  // namespace dissolve

#endif  // DISSOLVE_MLP_HPP
