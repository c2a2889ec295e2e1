#include "asv/nn/replay_buffer.hpp"

#include <algorithm>
#include <random>

#include "asv/types.hpp"

namespace asv::nn {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int observation_dim, int action_dim)
    : capacity_(capacity), obs_dim_(observation_dim), act_dim_(action_dim) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer capacity must be positive");
  // Reserve address space only; pages are touched as transitions arrive.
  obs_.reserve(capacity * obs_dim_);
  next_obs_.reserve(capacity * obs_dim_);
  action_.reserve(capacity * act_dim_);
  reward_.reserve(capacity);
  done_.reserve(capacity);
}

void ReplayBuffer::push(const Transition& t) {
  push(t.observation, t.action, t.reward, t.next_observation, t.done);
}

void ReplayBuffer::push(const Eigen::VectorXd& obs, const Eigen::VectorXd& action, double reward,
                        const Eigen::VectorXd& next_obs, bool done) {
  if (obs.size() != obs_dim_ || next_obs.size() != obs_dim_ || action.size() != act_dim_)
    throw ContractViolation("ReplayBuffer::push: dimension mismatch");
  if (size_ < capacity_) {
    obs_.insert(obs_.end(), obs.data(), obs.data() + obs_dim_);
    next_obs_.insert(next_obs_.end(), next_obs.data(), next_obs.data() + obs_dim_);
    action_.insert(action_.end(), action.data(), action.data() + act_dim_);
    reward_.push_back(reward);
    done_.push_back(done ? 1 : 0);
    ++size_;
    head_ = size_ % capacity_;
    return;
  }
  const std::size_t s = head_;
  std::copy_n(obs.data(), obs_dim_, obs_.begin() + s * obs_dim_);
  std::copy_n(next_obs.data(), obs_dim_, next_obs_.begin() + s * obs_dim_);
  std::copy_n(action.data(), act_dim_, action_.begin() + s * act_dim_);
  reward_[s] = reward;
  done_[s] = done ? 1 : 0;
  head_ = (head_ + 1) % capacity_;
}

std::size_t ReplayBuffer::slot(std::size_t logical) const {
  return size_ < capacity_ ? logical : (head_ + logical) % capacity_;
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ContractViolation("ReplayBuffer::at: index out of range");
  const std::size_t s = slot(i);
  Transition t;
  t.observation = Eigen::Map<const Eigen::VectorXd>(obs_.data() + s * obs_dim_, obs_dim_);
  t.next_observation = Eigen::Map<const Eigen::VectorXd>(next_obs_.data() + s * obs_dim_, obs_dim_);
  t.action = Eigen::Map<const Eigen::VectorXd>(action_.data() + s * act_dim_, act_dim_);
  t.reward = reward_[s];
  t.done = done_[s] != 0;
  return t;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  if (n > size_) throw ContractViolation("ReplayBuffer::sample: buffer holds fewer than n transitions");
  std::vector<std::size_t> picked;
  picked.reserve(n);
  for (std::size_t j = size_ - n; j < size_; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    if (std::find(picked.begin(), picked.end(), t) == picked.end())
      picked.push_back(t);
    else
      picked.push_back(j);
  }
  return picked;
}

Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const { return gather(sample_indices(n, rng)); }

Batch ReplayBuffer::gather(const std::vector<std::size_t>& logical) const {
  const auto n = static_cast<Eigen::Index>(logical.size());
  Batch b;
  b.observation.resize(obs_dim_, n);
  b.next_observation.resize(obs_dim_, n);
  b.action.resize(act_dim_, n);
  b.reward.resize(n);
  b.done.resize(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    if (logical[c] >= size_) throw ContractViolation("ReplayBuffer::gather: index out of range");
    const std::size_t s = slot(logical[c]);
    b.observation.col(c) = Eigen::Map<const Eigen::VectorXd>(obs_.data() + s * obs_dim_, obs_dim_);
    b.next_observation.col(c) = Eigen::Map<const Eigen::VectorXd>(next_obs_.data() + s * obs_dim_, obs_dim_);
    b.action.col(c) = Eigen::Map<const Eigen::VectorXd>(action_.data() + s * act_dim_, act_dim_);
    b.reward(c) = reward_[s];
    b.done(c) = done_[s] ? 1.0 : 0.0;
  }
  return b;
}

}  // namespace asv::nn
