#pragma once

#include "ifolab/common/rng.hpp"
#include "ifolab/envs/env.hpp"

namespace ifolab::envs {

// Cart-pole balancing, Euler-integrated at tau = 0.02. Actions: 0 push left,
// 1 push right. Reward +1 per step; episode ends on |theta| > 12 deg,
// |x| > 2.4, or the step cap. Goal: surviving >= 195 steps.
class CartPoleEnv final : public Env {
 public:
  explicit CartPoleEnv(EnvSpec spec) : Env(std::move(spec)) {}

  void reset(std::uint64_t seed) override;
  bool goal() const override { return steps() >= kGoalSteps; }

  double x() const { return x_; }
  double x_dot() const { return x_dot_; }
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }

  static constexpr int kGoalSteps = 195;

 protected:
  StepResult advance(int action) override;

 private:
  void encode();
  double x_ = 0, x_dot_ = 0, theta_ = 0, theta_dot_ = 0;
};

// Mountain car: underpowered car in a valley. Actions: 0 push left, 1 coast,
// 2 push right. Reward -1 per step; done at position >= 0.5 or 200 steps.
class MountainCarEnv final : public Env {
 public:
  explicit MountainCarEnv(EnvSpec spec) : Env(std::move(spec)) {}

  void reset(std::uint64_t seed) override;
  bool goal() const override { return position_ >= kGoalPosition; }

  double position() const { return position_; }
  double velocity() const { return velocity_; }

  static constexpr double kGoalPosition = 0.5;

 protected:
  StepResult advance(int action) override;

 private:
  void encode();
  double position_ = 0, velocity_ = 0;
};

// Acrobot: two-link pendulum, torque on the middle joint, RK4 at dt = 0.2.
// Actions: 0 torque -1, 1 torque 0, 2 torque +1. Reward -1 per step; done
// when the tip height criterion -cos(t1) - cos(t1 + t2) exceeds 1.
class AcrobotEnv final : public Env {
 public:
  explicit AcrobotEnv(EnvSpec spec) : Env(std::move(spec)) {}

  void reset(std::uint64_t seed) override;
  bool goal() const override { return solved_; }

  double theta1() const { return s_[0]; }
  double theta2() const { return s_[1]; }
  double omega1() const { return s_[2]; }
  double omega2() const { return s_[3]; }

 protected:
  StepResult advance(int action) override;

 private:
  void encode();
  bool tip_above_line() const;
  double s_[4] = {0, 0, 0, 0};  // theta1, theta2, omega1, omega2
  bool solved_ = false;
};

}  // namespace ifolab::envs
