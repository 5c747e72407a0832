#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/controlled_step_result.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

namespace dimer {

struct Tolerances {
  double relative = 1e-10;
  double absolute = 1e-12;
  double initial_step = 1e-3;
  std::size_t max_steps = 50'000'000;
};

/// Raised when the adaptive stepper cannot make progress or the trajectory
/// leaves its admissible domain.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t)
      : std::runtime_error(what), time_(t) {}
  /// Last time at which the state was valid.
  [[nodiscard]] double time() const { return time_; }

 private:
  double time_;
};

/// Error-controlled Runge-Kutta-Fehlberg 7(8) stepping that lands exactly on
/// requested output times. The step size carries over between calls to
/// `advance`, so sampling does not reset the controller.
template <class State>
class AdaptiveIntegrator {
 public:
  explicit AdaptiveIntegrator(Tolerances tol = {})
      : tol_(tol),
        stepper_(boost::numeric::odeint::make_controlled(
            tol.absolute, tol.relative,
            boost::numeric::odeint::runge_kutta_fehlberg78<State>())),
        dt_(tol.initial_step) {}

  /// Integrates `x` from `t` to `t_target` (t is updated). `valid(x)` is
  /// evaluated after every accepted step; a false result restores the last
  /// valid state and throws IntegrationError.
  template <class System, class Valid>
  void advance(System&& system, State& x, double& t, double t_target,
               Valid&& valid) {
    namespace ode = boost::numeric::odeint;
    while (t < t_target) {
      if (++steps_ > tol_.max_steps) {
        throw IntegrationError("step budget exhausted", t);
      }
      const bool clipped = dt_ >= t_target - t;
      double h = clipped ? t_target - t : dt_;
      const State before = x;
      const double t_before = t;
      const auto result = stepper_.try_step(system, x, t, h);
      if (result == ode::success && !valid(x)) {
        // overshoot into the excluded region: retry with a smaller step
        x = before;
        t = t_before;
        dt_ = 0.25 * h;
        if (!(dt_ > 1e-12 * std::max(1.0, std::abs(t)))) {
          throw IntegrationError("trajectory left the admissible domain", t);
        }
        continue;
      }
      if (result == ode::success) {
        if (clipped) {
          t = t_target;
          // keep the unclipped proposal for the next interval
          dt_ = std::max(dt_, h);
        } else {
          dt_ = h;
        }
      } else {
        dt_ = h;
        if (!(dt_ > 1e-14 * std::max(1.0, std::abs(t)))) {
          throw IntegrationError("step size underflow", t);
        }
      }
    }
  }

  template <class System>
  void advance(System&& system, State& x, double& t, double t_target) {
    advance(std::forward<System>(system), x, t, t_target,
            [](const State&) { return true; });
  }

  [[nodiscard]] std::size_t steps() const { return steps_; }
  [[nodiscard]] const Tolerances& tolerances() const { return tol_; }

 private:
  using Stepper = decltype(boost::numeric::odeint::make_controlled(
      0.0, 0.0, boost::numeric::odeint::runge_kutta_fehlberg78<State>()));

  Tolerances tol_;
  Stepper stepper_;
  double dt_;
  std::size_t steps_ = 0;
};

}  // namespace dimer
