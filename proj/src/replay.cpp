#include "rlbd/replay.hpp"

#include <stdexcept>

namespace rlbd {

void ReplayBuffer::push(Transition stored, Transition original) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
    if (stored_.size() < capacity_) {
        stored_.push_back(std::move(stored));
        originals_.push_back(std::move(original));
    } else {
        stored_[cursor_] = std::move(stored);
        originals_[cursor_] = std::move(original);
        cursor_ = (cursor_ + 1) % capacity_;
    }
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch, std::mt19937_64& rng) const {
    if (stored_.empty()) throw std::logic_error("ReplayBuffer: sampling from empty buffer");
    std::uniform_int_distribution<std::size_t> dist(0, stored_.size() - 1);
    std::vector<Transition> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) out.push_back(stored_[dist(rng)]);
    return out;
}

ReplayBuffer::AuditResult ReplayBuffer::audit() const {
    AuditResult res;
    res.checked = stored_.size();
    for (std::size_t i = 0; i < stored_.size(); ++i) {
        const Transition& s = stored_[i];
        const Transition& o = originals_[i];
        if (!same_state(s.state, o.state) || s.action != o.action ||
            !same_state(s.next_state, o.next_state) || s.done != o.done) {
            ++res.field_violations;
            res.clean = false;
        }
        if (s.reward != o.reward) ++res.reward_changes;
    }
    return res;
}

}  // namespace rlbd
