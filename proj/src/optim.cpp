#include "tsk/optim.hpp"

#include "tsk/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsk {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::SgdMomentum: return "sgd";
    case OptimizerKind::Adam: return "adam";
    case OptimizerKind::AdaBound: return "adabound";
  }
  return "adabound";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::SgdMomentum;
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "adabound") return OptimizerKind::AdaBound;
  throw Error(ErrorKind::InvalidArgument, "unknown optimizer '" + std::string(name) + "'",
              {{"expected", "sgd|adam|adabound"}});
}

namespace {

// Allocates moments on first use; afterwards every call must present the
// same group layout.
void prepare(OptimizerState& state, const ParamViews& params, const GradViews& grads, bool second_moment) {
  if (params.size() != grads.size()) {
    throw Error(ErrorKind::ShapeMismatch, "parameter and gradient group counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size()) {
      throw Error(ErrorKind::ShapeMismatch, "parameter and gradient sizes differ",
                  {{"group", std::to_string(i)}});
    }
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      if (second_moment) state.second_moment.emplace_back(p.size(), 0.0);
    }
    return;
  }
  bool same = state.first_moment.size() == params.size();
  for (std::size_t i = 0; same && i < params.size(); ++i) same = state.first_moment[i].size() == params[i].size();
  if (!same) throw Error(ErrorKind::ShapeMismatch, "parameter layout changed between optimizer steps");
  if (second_moment && state.second_moment.size() != params.size()) {
    throw Error(ErrorKind::ShapeMismatch, "optimizer state lacks second moments");
  }
}

}  // namespace

void sgd_momentum_step(OptimizerState& state, const ParamViews& params, const GradViews& grads) {
  prepare(state, params, grads, false);
  ++state.t;
  const auto& c = state.config;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& v = state.first_moment[i];
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      v[j] = c.momentum * v[j] + grads[i][j];
      params[i][j] -= c.lr * v[j];
    }
  }
}

void adam_step(OptimizerState& state, const ParamViews& params, const GradViews& grads) {
  prepare(state, params, grads, true);
  ++state.t;
  const auto& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, double(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      const double g = grads[i][j];
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g;
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g * g;
      const double denom = std::sqrt(v[j]) / std::sqrt(bc2) + c.eps;
      params[i][j] -= c.lr / bc1 * m[j] / denom;
    }
  }
}

std::pair<double, double> adabound_bounds(const OptimizerConfig& cfg, std::int64_t t) {
  const double s = cfg.bound_speed * double(t);
  return {cfg.final_lr * (1.0 - 1.0 / (s + 1.0)), cfg.final_lr * (1.0 + 1.0 / s)};
}

void adabound_step(OptimizerState& state, const ParamViews& params, const GradViews& grads) {
  prepare(state, params, grads, true);
  ++state.t;
  const auto& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, double(state.t));
  const double step_size = c.lr * std::sqrt(bc2) / bc1;
  const auto [lower, upper] = adabound_bounds(c, state.t);
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      const double g = grads[i][j];
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g;
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g * g;
      const double rate = std::clamp(step_size / (std::sqrt(v[j]) + c.eps), lower, upper);
      rmin = std::min(rmin, rate);
      rmax = std::max(rmax, rate);
      params[i][j] -= rate * m[j];
    }
  }
  state.last_rate_min = rmin;
  state.last_rate_max = rmax;
}

void optimizer_step(OptimizerState& state, const ParamViews& params, const GradViews& grads) {
  switch (state.config.kind) {
    case OptimizerKind::SgdMomentum: return sgd_momentum_step(state, params, grads);
    case OptimizerKind::Adam: return adam_step(state, params, grads);
    case OptimizerKind::AdaBound: return adabound_step(state, params, grads);
  }
}

}  // namespace tsk
