#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rankher/rng.hpp"
#include "rankher/tensor.hpp"

namespace rankher {

using nn::Tensor;

// One (state||goal, action, reward, next_state||goal) tuple. The trailing
// goal_dim entries of both state fields hold the same goal; achieved_goal_next
// is kept so hindsight relabeling can recompute rewards.
struct Transition {
  Tensor state_goal;
  Tensor action;
  double reward = -1.0;
  Tensor next_state_goal;
  Tensor achieved_goal_next;
  int episode_id = 0;
  int t = 0;
  bool hindsight = false;
};

// Fixed-capacity FIFO ring with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition tr);
  std::vector<Transition> sample_batch(std::size_t batch_size,
                                       RngStream& rng) const;

  std::size_t size() const { return count_; }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t total_pushed() const { return total_; }

  // i-th oldest stored transition (0 = next to be evicted); for audits.
  const Transition& oldest(std::size_t i) const;

 private:
  std::vector<Transition> storage_;
  std::size_t capacity_;
  std::size_t head_ = 0;  // next write slot once full
  std::size_t count_ = 0;
  std::uint64_t total_ = 0;
};

}  // namespace rankher
