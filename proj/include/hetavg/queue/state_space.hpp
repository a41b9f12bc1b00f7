/*
   Copyright 2026 The hetavg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

#include "hetavg/core/errors.hpp"
#include "hetavg/queue/params.hpp"

namespace hetavg::queue {

/// Busy-server subsets S of {0..k-1} with |S| <= k-1, ordered by size then by
/// bitmask, plus one aggregate seed state for "all k servers busy". The seed
/// stands for every state with n >= k customers through p_n = rho^(n-k) p_k.
class BusyStateSpace {
public:
    using Mask = std::uint32_t;

    explicit BusyStateSpace(int k) : k_(k) {
        if (k < 1 || k > kMaxExactServers) {
            throw CapacityError("busy-state space supports 1 <= k <= 14");
        }
        const Mask full = full_mask();
        masks_.reserve(full);
        for (Mask m = 0; m < full; ++m) masks_.push_back(m);
        std::stable_sort(masks_.begin(), masks_.end(), [](Mask a, Mask b) {
            return std::popcount(a) < std::popcount(b);
        });
        ordinal_.assign(static_cast<std::size_t>(full) + 1, -1);
        for (std::size_t i = 0; i < masks_.size(); ++i) ordinal_[masks_[i]] = static_cast<int>(i);
        ordinal_[full] = static_cast<int>(masks_.size());
    }

    int servers() const noexcept { return k_; }
    /// Number of subset states, 2^k - 1.
    std::size_t subset_count() const noexcept { return masks_.size(); }
    /// Ordinal of the seed; equals subset_count().
    std::size_t seed_ordinal() const noexcept { return masks_.size(); }
    Mask full_mask() const noexcept { return (Mask{1} << k_) - 1; }

    Mask mask(std::size_t ordinal) const { return ordinal == seed_ordinal() ? full_mask() : masks_.at(ordinal); }
    std::size_t ordinal(Mask m) const { return static_cast<std::size_t>(ordinal_.at(m)); }

    static int busy_count(Mask m) noexcept { return std::popcount(m); }

private:
    int k_;
    std::vector<Mask> masks_;
    std::vector<int> ordinal_;
};

}  // namespace hetavg::queue
