#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rlbd/mdp.hpp"

namespace rlbd {

// Ring buffer of transitions. Each slot also keeps the transition exactly as
// collected, so a poisoning pass can be audited field by field afterwards.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    // `stored` is what the agent trains on (possibly poisoned reward);
    // `original` is the record as collected from the environment.
    void push(Transition stored, Transition original);

    // Convenience for the clean path.
    void push(const Transition& t) { push(t, t); }

    std::size_t size() const { return stored_.size(); }
    std::size_t capacity() const { return capacity_; }

    const Transition& at(std::size_t i) const { return stored_[i]; }
    const Transition& original_at(std::size_t i) const { return originals_[i]; }

    std::vector<Transition> sample(std::size_t batch, std::mt19937_64& rng) const;

    struct AuditResult {
        bool clean = true;           // no state/action/next_state/done modified
        std::size_t checked = 0;
        std::size_t reward_changes = 0;
        std::size_t field_violations = 0;
    };

    // Compares every stored entry against its as-collected original.
    AuditResult audit() const;

  private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> stored_;
    std::vector<Transition> originals_;
};

}  // namespace rlbd
