#pragma once

#include <cstddef>
#include <cstdint>

namespace ftg {

struct GenerationConfig {
    int max_len = 3;                       // BFS sequence length threshold
    std::uint64_t rng_seed = 0;            // seeds refinement tie-breaking
    int max_chain_depth = 2;               // cap on adaptation chain length
    bool allow_pointer_deref = false;      // admit *const T -> T chains
    std::size_t frontier_cap = 1'000'000;  // hard abort above this frontier size
};

}  // namespace ftg
