#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "asv/random.hpp"

namespace asv::nn {

struct Transition {
  Eigen::VectorXd observation;
  Eigen::VectorXd action;
  double reward = 0;
  Eigen::VectorXd next_observation;
  bool done = false;
};

/// Column-per-sample minibatch.
struct Batch {
  Eigen::MatrixXd observation;
  Eigen::MatrixXd action;
  Eigen::RowVectorXd reward;
  Eigen::MatrixXd next_observation;
  Eigen::RowVectorXd done;  // 1.0 for terminal transitions

  Eigen::Index size() const { return reward.size(); }
};

/// Fixed-capacity ring of transitions; storage grows lazily up to capacity.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int observation_dim, int action_dim);

  void push(const Transition& t);
  void push(const Eigen::VectorXd& obs, const Eigen::VectorXd& action, double reward,
            const Eigen::VectorXd& next_obs, bool done);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  /// i = 0 is the oldest stored transition.
  Transition at(std::size_t i) const;

  /// n distinct logical indices drawn uniformly (Floyd's algorithm).
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;
  Batch sample(std::size_t n, Rng& rng) const;
  Batch gather(const std::vector<std::size_t>& logical) const;

 private:
  std::size_t slot(std::size_t logical) const;

  std::size_t capacity_;
  int obs_dim_, act_dim_;
  std::size_t size_ = 0, head_ = 0;  // head_: next slot to overwrite once full
  std::vector<double> obs_, next_obs_, action_, reward_;
  std::vector<unsigned char> done_;
};

}  // namespace asv::nn
