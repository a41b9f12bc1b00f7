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

#include <cstdint>
#include <string>
#include <vector>

#include "hetavg/core/errors.hpp"

namespace hetavg::diffusion {

enum class Generator { complete, circle_deg2, circle_deg4, torus_4nbr };

inline std::string to_string(Generator g) {
    switch (g) {
        case Generator::complete: return "complete";
        case Generator::circle_deg2: return "circle_deg2";
        case Generator::circle_deg4: return "circle_deg4";
        case Generator::torus_4nbr: return "torus_4nbr";
    }
    return "unknown";
}

/// Undirected graph on M vertices in which every vertex has the same degree.
/// Only built through the named generators, which also guarantee that every
/// vertex sees the same neighborhood structure.
class NetworkTopology {
public:
    static NetworkTopology complete(int m) {
        check_size(m, 1, "complete");
        NetworkTopology net(Generator::complete, m);
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) net.connect(i, j);
        net.finish();
        return net;
    }

    static NetworkTopology circle_deg2(int m) {
        check_size(m, 3, "circle_deg2");
        NetworkTopology net(Generator::circle_deg2, m);
        for (int i = 0; i < m; ++i) net.connect(i, (i + 1) % m);
        net.finish();
        return net;
    }

    static NetworkTopology circle_deg4(int m) {
        check_size(m, 5, "circle_deg4");
        NetworkTopology net(Generator::circle_deg4, m);
        for (int i = 0; i < m; ++i) {
            net.connect(i, (i + 1) % m);
            net.connect(i, (i + 2) % m);
        }
        net.finish();
        return net;
    }

    /// m x m torus, each vertex linked to its four lattice neighbors.
    static NetworkTopology torus(int side) {
        if (side < 3) throw DomainError("torus_4nbr requires side m >= 3");
        NetworkTopology net(Generator::torus_4nbr, side * side);
        net.side_ = side;
        for (int r = 0; r < side; ++r) {
            for (int c = 0; c < side; ++c) {
                const int v = r * side + c;
                net.connect(v, r * side + (c + 1) % side);
                net.connect(v, ((r + 1) % side) * side + c);
            }
        }
        net.finish();
        return net;
    }

    /// Builds by tag; `size` is M, except for the torus where it must be a
    /// perfect square m^2.
    static NetworkTopology make(Generator g, int size) {
        switch (g) {
            case Generator::complete: return complete(size);
            case Generator::circle_deg2: return circle_deg2(size);
            case Generator::circle_deg4: return circle_deg4(size);
            case Generator::torus_4nbr: {
                int side = 0;
                while ((side + 1) * (side + 1) <= size) ++side;
                if (side * side != size) throw DomainError("torus_4nbr requires M = m^2");
                return torus(side);
            }
        }
        throw DomainError("unknown network generator");
    }

    int size() const noexcept { return static_cast<int>(neighbors_.size()); }
    int degree() const noexcept { return degree_; }
    Generator generator() const noexcept { return generator_; }
    int torus_side() const noexcept { return side_; }
    const std::vector<int>& neighbors(int v) const { return neighbors_.at(static_cast<std::size_t>(v)); }

    /// Neighbor set of `v` as a bit mask; defined for M <= 64.
    std::uint64_t neighbor_mask(int v) const { return masks_.at(static_cast<std::size_t>(v)); }

    bool adjacent(int a, int b) const {
        for (int n : neighbors(a))
            if (n == b) return true;
        return false;
    }

    std::string describe() const {
        std::string s = to_string(generator_);
        if (generator_ == Generator::torus_4nbr) {
            s += "(" + std::to_string(side_) + "x" + std::to_string(side_) + ")";
        } else {
            s += "(M=" + std::to_string(size()) + ")";
        }
        return s;
    }

private:
    NetworkTopology(Generator g, int m) : generator_(g), neighbors_(static_cast<std::size_t>(m)) {}

    static void check_size(int m, int min, const char* what) {
        if (m < min) throw DomainError(std::string(what) + " requires M >= " + std::to_string(min));
    }

    void connect(int a, int b) {
        if (a == b || adjacent(a, b)) return;
        neighbors_[static_cast<std::size_t>(a)].push_back(b);
        neighbors_[static_cast<std::size_t>(b)].push_back(a);
    }

    void finish() {
        degree_ = static_cast<int>(neighbors_.front().size());
        masks_.assign(neighbors_.size(), 0);
        for (std::size_t v = 0; v < neighbors_.size(); ++v) {
            if (static_cast<int>(neighbors_[v].size()) != degree_) {
                throw DomainError("network generator produced unequal degrees");
            }
            if (neighbors_.size() <= 64)
                for (int n : neighbors_[v]) masks_[v] |= std::uint64_t{1} << n;
        }
    }

    Generator generator_;
    std::vector<std::vector<int>> neighbors_;
    std::vector<std::uint64_t> masks_;
    int degree_ = 0;
    int side_ = 0;
};

}  // namespace hetavg::diffusion
