// SPDX-License-Identifier: Apache-2.0

#include "ssrelay/finite_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ssrelay {

FiniteMdp::FiniteMdp(std::vector<std::uint32_t> block_of_state, std::vector<double> state_reward,
                     std::size_t n_blocks, std::size_t n_pd, std::size_t n_ic)
    : block_of_state_(std::move(block_of_state)),
      state_reward_(std::move(state_reward)),
      n_blocks_(n_blocks),
      n_pd_(n_pd),
      n_ic_(n_ic) {
    if (block_of_state_.size() != state_reward_.size()) {
        throw std::invalid_argument("FiniteMdp: block map and state rewards differ in size");
    }
    if (block_of_state_.empty() || n_blocks_ == 0 || n_pd_ == 0 || n_ic_ == 0) {
        throw std::invalid_argument("FiniteMdp: empty state or action space");
    }
    for (auto b : block_of_state_) {
        if (b >= n_blocks_) throw std::invalid_argument("FiniteMdp: block index out of range");
    }
    action_reward_.reserve(n_blocks_ * action_count());
    row_offset_.reserve(n_blocks_ * action_count() + 1);
}

FiniteMdp FiniteMdp::plain(std::size_t n_states, std::size_t n_actions) {
    std::vector<std::uint32_t> blocks(n_states);
    std::iota(blocks.begin(), blocks.end(), 0u);
    return FiniteMdp(std::move(blocks), std::vector<double>(n_states, 0.0), n_states, n_actions, 1);
}

void FiniteMdp::add_row(std::size_t block, std::size_t action, double action_reward,
                        std::span<const SparseEntry> entries) {
    const std::size_t expected = action_reward_.size();
    if (block * action_count() + action != expected) {
        throw std::logic_error("FiniteMdp: rows must be added in block-major order");
    }
    for (const auto& e : entries) {
        if (e.next >= state_count()) throw std::invalid_argument("FiniteMdp: next state out of range");
    }
    action_reward_.push_back(action_reward);
    entries_.insert(entries_.end(), entries.begin(), entries.end());
    row_offset_.push_back(entries_.size());
}

void FiniteMdp::check(double tol) const {
    if (action_reward_.size() != n_blocks_ * action_count()) {
        throw std::logic_error("FiniteMdp: incomplete transition table");
    }
    for (std::size_t b = 0; b < n_blocks_; ++b) {
        for (std::size_t a = 0; a < action_count(); ++a) {
            double sum = 0.0;
            for (const auto& e : row(b, a)) {
                if (!(e.prob >= 0.0)) throw std::logic_error("FiniteMdp: negative probability");
                sum += e.prob;
            }
            if (std::abs(sum - 1.0) > tol) {
                throw std::logic_error("FiniteMdp: row (" + std::to_string(b) + ", " +
                                       std::to_string(a) + ") sums to " + std::to_string(sum));
            }
        }
    }
}

double FiniteMdp::reward_bound() const {
    double bound = 0.0;
    for (std::size_t s = 0; s < state_count(); ++s) {
        const auto b = block_of_state_[s];
        for (std::size_t a = 0; a < action_count(); ++a) {
            bound = std::max(bound, std::abs(state_reward_[s] + action_reward(b, a)));
        }
    }
    return bound;
}

}  // namespace ssrelay
