#pragma once

#include <Eigen/Dense>

#include "asv/random.hpp"

namespace asv::nn {

/// Ornstein-Uhlenbeck exploration noise, mean zero:
///   x <- x - theta x dt + sigma sqrt(dt) n
struct OuNoise {
  double theta = 0.2;
  double sigma = 0.15;
  double dt = 0.1;
  Eigen::VectorXd state;

  explicit OuNoise(int dim = 4, double theta_ = 0.2, double sigma_ = 0.15, double dt_ = 0.1)
      : theta(theta_), sigma(sigma_), dt(dt_), state(Eigen::VectorXd::Zero(dim)) {}

  void reset() { state.setZero(); }
  double stationary_std() const;
};

/// Advances the process one step and returns the new state.
const Eigen::VectorXd& ou_sample(OuNoise& noise, GaussianSource& source);

}  // namespace asv::nn
