#include "asv/nn/ou_noise.hpp"

#include <cmath>

namespace asv::nn {

double OuNoise::stationary_std() const { return sigma / std::sqrt(2.0 * theta); }

const Eigen::VectorXd& ou_sample(OuNoise& noise, GaussianSource& source) {
  const double diffusion = noise.sigma * std::sqrt(noise.dt);
  for (Eigen::Index i = 0; i < noise.state.size(); ++i)
    noise.state(i) += -noise.theta * noise.state(i) * noise.dt + diffusion * source();
  return noise.state;
}

}  // namespace asv::nn
