#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tsk {

enum class OptimizerKind { SgdMomentum, Adam, AdaBound };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::AdaBound;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double momentum = 0.9;   // SGD only
  double final_lr = 0.1;   // AdaBound only
  double bound_speed = 1e-3;  // AdaBound gamma
};

// Moments shaped like the parameter groups plus the step counter. One state
// spans every parameter group with a single learning rate.
struct OptimizerState {
  OptimizerConfig config;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::int64_t t = 0;

  // Range of the clipped per-parameter AdaBound rates used by the last step.
  double last_rate_min = 0.0;
  double last_rate_max = 0.0;

  explicit OptimizerState(OptimizerConfig cfg = {}) : config(cfg) {}
};

using ParamViews = std::vector<std::span<double>>;
using GradViews = std::vector<std::span<const double>>;

void sgd_momentum_step(OptimizerState& state, const ParamViews& params, const GradViews& grads);
void adam_step(OptimizerState& state, const ParamViews& params, const GradViews& grads);
void adabound_step(OptimizerState& state, const ParamViews& params, const GradViews& grads);

// Dispatches on state.config.kind.
void optimizer_step(OptimizerState& state, const ParamViews& params, const GradViews& grads);

// AdaBound clipping interval [lower, upper] at step t (t >= 1).
std::pair<double, double> adabound_bounds(const OptimizerConfig& cfg, std::int64_t t);

}  // namespace tsk
