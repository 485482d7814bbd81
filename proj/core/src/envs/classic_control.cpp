#include "ifolab/envs/classic_control.hpp"

#include <algorithm>
#include <cmath>

namespace ifolab::envs {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ---------------------------------------------------------------- cart-pole

namespace {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kPoleHalfLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kPoleHalfLength;
constexpr double kForceMag = 10.0;
constexpr double kTau = 0.02;
constexpr double kThetaLimit = 12.0 * 2.0 * kPi / 360.0;
constexpr double kXLimit = 2.4;
}  // namespace

void CartPoleEnv::reset(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  x_ = uniform_real(rng, -0.05, 0.05);
  x_dot_ = uniform_real(rng, -0.05, 0.05);
  theta_ = uniform_real(rng, -0.05, 0.05);
  theta_dot_ = uniform_real(rng, -0.05, 0.05);
  begin_episode();
  encode();
}

StepResult CartPoleEnv::advance(int action) {
  const double force = action == 1 ? kForceMag : -kForceMag;
  const double cos_t = std::cos(theta_);
  const double sin_t = std::sin(theta_);
  const double temp =
      (force + kPoleMassLength * theta_dot_ * theta_dot_ * sin_t) / kTotalMass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kPoleHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

  x_ += kTau * x_dot_;
  x_dot_ += kTau * x_acc;
  theta_ += kTau * theta_dot_;
  theta_dot_ += kTau * theta_acc;
  encode();

  const bool fell = std::abs(x_) > kXLimit || std::abs(theta_) > kThetaLimit;
  return {1.0, fell};
}

void CartPoleEnv::encode() {
  state_ = {x_, x_dot_, theta_, theta_dot_};
}

// ------------------------------------------------------------- mountain car

namespace {
constexpr double kMcForce = 0.001;
constexpr double kMcGravity = 0.0025;
constexpr double kMcMinPos = -1.2;
constexpr double kMcMaxPos = 0.6;
constexpr double kMcMaxSpeed = 0.07;
}  // namespace

void MountainCarEnv::reset(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  position_ = uniform_real(rng, -0.6, -0.4);
  velocity_ = 0.0;
  begin_episode();
  encode();
}

StepResult MountainCarEnv::advance(int action) {
  velocity_ += (action - 1) * kMcForce - std::cos(3.0 * position_) * kMcGravity;
  velocity_ = std::clamp(velocity_, -kMcMaxSpeed, kMcMaxSpeed);
  position_ += velocity_;
  position_ = std::clamp(position_, kMcMinPos, kMcMaxPos);
  if (position_ <= kMcMinPos && velocity_ < 0.0) velocity_ = 0.0;
  encode();
  return {-1.0, position_ >= kGoalPosition};
}

void MountainCarEnv::encode() {
  state_ = {position_, velocity_};
}

// ------------------------------------------------------------------ acrobot

namespace {
constexpr double kDt = 0.2;
constexpr double kL1 = 1.0;   // link 1 length
constexpr double kM1 = 1.0;   // link masses
constexpr double kM2 = 1.0;
constexpr double kLc1 = 0.5;  // centers of mass
constexpr double kLc2 = 0.5;
constexpr double kI1 = 1.0;   // moments of inertia
constexpr double kI2 = 1.0;
constexpr double kG = 9.8;
constexpr double kMaxVel1 = 4.0 * kPi;
constexpr double kMaxVel2 = 9.0 * kPi;

double wrap_pi(double x) {
  while (x > kPi) x -= 2.0 * kPi;
  while (x < -kPi) x += 2.0 * kPi;
  return x;
}

// Book dynamics of the two-link pendulum with torque a on the second joint.
void acrobot_derivs(const double s[4], double torque, double ds[4]) {
  const double t1 = s[0], t2 = s[1], w1 = s[2], w2 = s[3];
  const double d1 = kM1 * kLc1 * kLc1 +
                    kM2 * (kL1 * kL1 + kLc2 * kLc2 + 2.0 * kL1 * kLc2 * std::cos(t2)) +
                    kI1 + kI2;
  const double d2 = kM2 * (kLc2 * kLc2 + kL1 * kLc2 * std::cos(t2)) + kI2;
  const double phi2 = kM2 * kLc2 * kG * std::cos(t1 + t2 - kPi / 2.0);
  const double phi1 = -kM2 * kL1 * kLc2 * w2 * w2 * std::sin(t2) -
                      2.0 * kM2 * kL1 * kLc2 * w2 * w1 * std::sin(t2) +
                      (kM1 * kLc1 + kM2 * kL1) * kG * std::cos(t1 - kPi / 2.0) + phi2;
  const double dd2 =
      (torque + d2 / d1 * phi1 - kM2 * kL1 * kLc2 * w1 * w1 * std::sin(t2) - phi2) /
      (kM2 * kLc2 * kLc2 + kI2 - d2 * d2 / d1);
  const double dd1 = -(d2 * dd2 + phi1) / d1;
  ds[0] = w1;
  ds[1] = w2;
  ds[2] = dd1;
  ds[3] = dd2;
}

void rk4_step(double s[4], double torque) {
  double k1[4], k2[4], k3[4], k4[4], tmp[4];
  acrobot_derivs(s, torque, k1);
  for (int i = 0; i < 4; ++i) tmp[i] = s[i] + 0.5 * kDt * k1[i];
  acrobot_derivs(tmp, torque, k2);
  for (int i = 0; i < 4; ++i) tmp[i] = s[i] + 0.5 * kDt * k2[i];
  acrobot_derivs(tmp, torque, k3);
  for (int i = 0; i < 4; ++i) tmp[i] = s[i] + kDt * k3[i];
  acrobot_derivs(tmp, torque, k4);
  for (int i = 0; i < 4; ++i)
    s[i] += kDt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}
}  // namespace

void AcrobotEnv::reset(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  for (double& v : s_) v = uniform_real(rng, -0.1, 0.1);
  solved_ = false;
  begin_episode();
  encode();
}

StepResult AcrobotEnv::advance(int action) {
  rk4_step(s_, static_cast<double>(action - 1));
  s_[0] = wrap_pi(s_[0]);
  s_[1] = wrap_pi(s_[1]);
  s_[2] = std::clamp(s_[2], -kMaxVel1, kMaxVel1);
  s_[3] = std::clamp(s_[3], -kMaxVel2, kMaxVel2);
  encode();
  if (tip_above_line()) solved_ = true;
  return {-1.0, solved_};
}

bool AcrobotEnv::tip_above_line() const {
  return -std::cos(s_[0]) - std::cos(s_[0] + s_[1]) > 1.0;
}

void AcrobotEnv::encode() {
  state_ = {std::cos(s_[0]), std::sin(s_[0]), std::cos(s_[1]),
            std::sin(s_[1]), s_[2], s_[3]};
}

}  // namespace ifolab::envs
