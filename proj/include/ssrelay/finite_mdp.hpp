// SPDX-License-Identifier: Apache-2.0
//
// Tabular MDP with shared continuations. States are grouped into blocks; all
// states of a block have the same action set, the same per-action reward term
// and the same transition rows, and differ only by an additive state reward:
//
//   Q(s, a) = state_reward[s] + action_reward[block(s), a]
//             + discount * sum_{s'} P(s' | block(s), a) * J(s')
//
// An ordinary finite MDP is the special case of one state per block and zero
// state rewards. Actions are indexed pd-major as a = pd_idx * n_ic + ic_idx.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ssrelay {

struct SparseEntry {
    std::uint32_t next;
    double prob;
};

class FiniteMdp {
public:
    /// Creates an MDP with `n_states` states partitioned into `block_of_state`
    /// blocks and an action grid of n_pd x n_ic actions.
    FiniteMdp(std::vector<std::uint32_t> block_of_state, std::vector<double> state_reward,
              std::size_t n_blocks, std::size_t n_pd, std::size_t n_ic);

    /// Plain MDP: one block per state, `n_actions` actions laid out as a
    /// single pd axis.
    static FiniteMdp plain(std::size_t n_states, std::size_t n_actions);

    /// Appends the row for (block, action). Rows must be added in
    /// block-major, action-minor order.
    void add_row(std::size_t block, std::size_t action, double action_reward,
                 std::span<const SparseEntry> entries);

    /// Throws std::logic_error if rows are missing or any row is not a
    /// probability distribution within `tol`.
    void check(double tol = 1e-12) const;

    std::size_t state_count() const noexcept { return block_of_state_.size(); }
    std::size_t block_count() const noexcept { return n_blocks_; }
    std::size_t action_count() const noexcept { return n_pd_ * n_ic_; }
    std::size_t pd_count() const noexcept { return n_pd_; }
    std::size_t ic_count() const noexcept { return n_ic_; }

    std::uint32_t block_of(std::size_t state) const { return block_of_state_[state]; }
    double state_reward(std::size_t state) const { return state_reward_[state]; }
    double action_reward(std::size_t block, std::size_t action) const {
        return action_reward_[block * action_count() + action];
    }
    std::span<const SparseEntry> row(std::size_t block, std::size_t action) const {
        const std::size_t r = block * action_count() + action;
        return {entries_.data() + row_offset_[r], row_offset_[r + 1] - row_offset_[r]};
    }

    /// Largest |state_reward + action_reward| over all (state, action).
    double reward_bound() const;

private:
    std::vector<std::uint32_t> block_of_state_;
    std::vector<double> state_reward_;
    std::size_t n_blocks_;
    std::size_t n_pd_;
    std::size_t n_ic_;
    std::vector<double> action_reward_;
    std::vector<std::size_t> row_offset_{0};
    std::vector<SparseEntry> entries_;
};

}  // namespace ssrelay
