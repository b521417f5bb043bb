#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <type_traits>
#include <utility>
#include <limits>
#include <string>
#include <vector>

#include "heirs/numerics/manifolds.hpp"

namespace heirs {

enum class CgStop {
  kGradientTolerance,
  kCostTolerance,
  kMaxIterations,
  kLineSearchFailure,
  kNonFinite,
};

const char* to_string(CgStop stop);

struct CgOptions {
  int max_iterations = 500;
  /// Stop when ||grad|| < gradient_tolerance * (1 + |cost|).
  double gradient_tolerance = 1e-6;
  /// Stop when |f_k - f_{k+1}| <= cost_tolerance * |f_k|.
  double cost_tolerance = 1e-8;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 60;
  double initial_step = 1.0;
  /// The trial step of iteration k+1 is growth * (accepted step of k).
  double step_growth = 2.0;
};

/// Per-iteration solver state, exposed to observers.
template <class Manifold>
struct CgState {
  typename Manifold::Point point;
  typename Manifold::Tangent gradient;
  typename Manifold::Tangent direction;
  typename Manifold::Tangent previous_gradient;
  double cost = 0.0;
  double step = 0.0;
  int iteration = 0;
};

struct CgTrace {
  std::vector<double> cost;  // cost[0] is the initial cost, one entry per accepted step after
  int iterations = 0;
  int restarts = 0;
  int steepest_fallbacks = 0;
  CgStop stop = CgStop::kMaxIterations;
  std::string diagnostic;
};

template <class Manifold>
struct CgResult {
  typename Manifold::Point point;
  double cost = 0.0;
  CgTrace trace;
};

/// Smooth cost on a manifold. `euclidean_gradient` is the gradient of the
/// cost in the ambient space with respect to the real inner product
/// Re Tr(A^H B); for a real function of complex Z this is 2 * df/dZ*.
/// `step_hint`, when set, proposes the first trial step along a direction.
template <class Manifold>
struct RiemannianProblem {
  using Point = typename Manifold::Point;
  using Tangent = typename Manifold::Tangent;
  std::function<double(const Point&)> cost;
  std::function<Tangent(const Point&)> euclidean_gradient;
  std::function<double(const Point&, const Tangent&)> step_hint;
};

/// Riemannian conjugate gradient with Polak-Ribiere+ directions, automatic
/// restart on non-descent directions, and Armijo backtracking. Transport is
/// tangent-space projection.
template <class Manifold, class Observer = std::nullptr_t>
CgResult<Manifold> riemannian_cg(const Manifold& manifold,
                                 const RiemannianProblem<Manifold>& problem,
                                 typename Manifold::Point x0, const CgOptions& options = {},
                                 Observer observer = nullptr) {
  using Tangent = typename Manifold::Tangent;

  CgResult<Manifold> result{x0, 0.0, {}};
  CgTrace& trace = result.trace;

  double f = problem.cost(x0);
  if (!std::isfinite(f)) {
    trace.stop = CgStop::kNonFinite;
    trace.diagnostic = "initial cost is not finite";
    result.cost = f;
    return result;
  }
  trace.cost.push_back(f);

  auto riemannian_gradient = [&](const typename Manifold::Point& x) {
    return manifold.project(x, problem.euclidean_gradient(x));
  };

  CgState<Manifold> state{x0, riemannian_gradient(x0), Tangent(), Tangent(), f, 0.0, 0};
  if (!state.gradient.allFinite()) {
    trace.stop = CgStop::kNonFinite;
    trace.diagnostic = "initial gradient is not finite";
    result.cost = f;
    return result;
  }
  state.direction = -state.gradient;
  double previous_step = options.initial_step;

  trace.stop = CgStop::kMaxIterations;
  for (int it = 0; it < options.max_iterations; ++it) {
    state.iteration = it;
    const double grad_sq = manifold.inner(state.point, state.gradient, state.gradient);
    if (std::sqrt(grad_sq) < options.gradient_tolerance * (1.0 + std::abs(state.cost))) {
      trace.stop = CgStop::kGradientTolerance;
      break;
    }

    double slope = manifold.inner(state.point, state.gradient, state.direction);
    if (!(slope < 0.0)) {
      state.direction = -state.gradient;
      slope = -grad_sq;
      ++trace.restarts;
    }

    auto line_search = [&](const Tangent& dir, double dir_slope, double trial)
        -> std::optional<std::pair<typename Manifold::Point, std::pair<double, double>>> {
      double alpha = trial;
      for (int b = 0; b <= options.max_backtracks; ++b) {
        auto candidate = manifold.retract(state.point, dir, alpha);
        if (candidate) {
          const double fc = problem.cost(*candidate);
          if (std::isfinite(fc) && fc <= state.cost + options.armijo * alpha * dir_slope) {
            return std::make_pair(std::move(*candidate), std::make_pair(fc, alpha));
          }
        }
        alpha *= options.shrink;
      }
      return std::nullopt;
    };

    double trial = it == 0 ? options.initial_step : options.step_growth * previous_step;
    if (problem.step_hint) {
      const double hint = problem.step_hint(state.point, state.direction);
      if (std::isfinite(hint) && hint > 0.0) trial = hint;
    }

    auto accepted = line_search(state.direction, slope, trial);
    if (!accepted) {
      // Fall back to a steepest-descent step before giving up.
      ++trace.steepest_fallbacks;
      state.direction = -state.gradient;
      double sd_trial = it == 0 ? options.initial_step : options.step_growth * previous_step;
      if (problem.step_hint) {
        const double hint = problem.step_hint(state.point, state.direction);
        if (std::isfinite(hint) && hint > 0.0) sd_trial = hint;
      }
      accepted = line_search(state.direction, -grad_sq, sd_trial);
    }
    if (!accepted) {
      trace.stop = CgStop::kLineSearchFailure;
      trace.diagnostic = "Armijo backtracking failed at iteration " + std::to_string(it);
      break;
    }

    auto& [x_new, values] = *accepted;
    const auto [f_new, alpha] = values;
    Tangent g_new = riemannian_gradient(x_new);
    if (!g_new.allFinite()) {
      trace.stop = CgStop::kNonFinite;
      trace.diagnostic = "gradient is not finite at iteration " + std::to_string(it);
      break;
    }

    const Tangent g_old = manifold.transport(x_new, state.gradient);
    const Tangent d_old = manifold.transport(x_new, state.direction);
    const double beta = std::max(
        0.0, manifold.inner(x_new, g_new, g_new - g_old) / std::max(grad_sq, 1e-300));

    const double f_old = state.cost;
    state.previous_gradient = std::move(state.gradient);
    state.gradient = std::move(g_new);
    state.direction = -state.gradient + beta * d_old;
    state.point = std::move(x_new);
    state.cost = f_new;
    state.step = alpha;
    previous_step = alpha;
    trace.cost.push_back(f_new);
    trace.iterations = it + 1;

    if constexpr (!std::is_same_v<Observer, std::nullptr_t>) {
      observer(static_cast<const CgState<Manifold>&>(state));
    }

    if (std::abs(f_old - f_new) <= options.cost_tolerance * std::abs(f_old)) {
      trace.stop = CgStop::kCostTolerance;
      break;
    }
  }

  result.point = std::move(state.point);
  result.cost = state.cost;
  return result;
}

}  // namespace heirs
