#include "satenq/replay.hpp"

#include "satenq/errors.hpp"

namespace satenq {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ContractError("ReplayBuffer: capacity must be positive");
    data_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
    ++pushed_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= data_.size()) throw ContractError("ReplayBuffer::at: index out of range");
    if (data_.size() < capacity_) return data_[i];
    return data_[(next_ + i) % capacity_];  // next_ is the oldest slot once full
}

const Transition& ReplayBuffer::sample_one(Rng& rng) const {
    if (data_.empty()) throw ContractError("ReplayBuffer::sample: buffer is empty");
    return data_[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(data_.size())))];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
    std::vector<Transition> out;
    out.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) out.push_back(sample_one(rng));
    return out;
}

PooledView PooledView::snapshot(const std::vector<const ReplayBuffer*>& buffers) {
    PooledView view;
    std::size_t total = 0;
    for (const auto* b : buffers) total += b->size();
    if (total == 0) throw ContractError("PooledView: all buffers are empty");
    view.data_.reserve(total);
    for (const auto* b : buffers)
        for (std::size_t i = 0; i < b->size(); ++i) view.data_.push_back(b->at(i));
    return view;
}

const Transition& PooledView::sample_one(Rng& rng) const {
    return data_[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(data_.size())))];
}

std::vector<Transition> PooledView::sample(std::size_t batch_size, Rng& rng) const {
    std::vector<Transition> out;
    out.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) out.push_back(sample_one(rng));
    return out;
}

}  // namespace satenq
