#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "satenq/rng.hpp"

namespace satenq {

// One (s, a, r, s', done) experience record. `done` is true only for real
// terminal transitions; step-cap truncations keep done=false so targets
// still bootstrap.
struct Transition {
    std::vector<double> state;
    std::vector<double> next_state;
    int action = 0;
    double reward = 0.0;
    bool done = false;
};

// Bounded FIFO store. Eviction is strictly oldest-first; sampling is uniform
// with replacement over the current contents.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    const Transition& sample_one(Rng& rng) const;
    std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t total_pushed() const { return pushed_; }

    // Logical order, 0 = oldest surviving element.
    const Transition& at(std::size_t i) const;

private:
    std::size_t capacity_;
    std::vector<Transition> data_;
    std::size_t next_ = 0;  // ring position of the next write
    std::uint64_t pushed_ = 0;
};

// Immutable snapshot of the union of several buffers (the distillation pool).
// Sampling is element-weighted: a transition's draw probability does not
// depend on which buffer it came from.
class PooledView {
public:
    static PooledView snapshot(const std::vector<const ReplayBuffer*>& buffers);

    std::size_t size() const { return data_.size(); }
    const Transition& at(std::size_t i) const { return data_[i]; }
    const Transition& sample_one(Rng& rng) const;
    std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

private:
    std::vector<Transition> data_;
};

}  // namespace satenq
