#include "rankher/replay.hpp"

#include <stdexcept>

namespace rankher {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  storage_.reserve(capacity < 4096 ? capacity : 4096);
}

void ReplayBuffer::push(Transition tr) {
  if (count_ < capacity_) {
    storage_.push_back(std::move(tr));
    ++count_;
  } else {
    storage_[head_] = std::move(tr);
    head_ = (head_ + 1) % capacity_;
  }
  ++total_;
}

const Transition& ReplayBuffer::oldest(std::size_t i) const {
  if (i >= count_) throw std::out_of_range("replay index out of range");
  return storage_[(head_ + i) % count_];
}

std::vector<Transition> ReplayBuffer::sample_batch(std::size_t batch_size,
                                                   RngStream& rng) const {
  if (count_ == 0) throw std::logic_error("sample from an empty replay buffer");
  std::vector<Transition> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i)
    batch.push_back(storage_[rng.uniform_index(count_)]);
  return batch;
}

}  // namespace rankher
