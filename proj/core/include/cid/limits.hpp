#pragma once

#include <cstddef>

namespace cid {

/// Enumeration caps. Every exhaustive search in the library checks one of
/// these before (or while) it runs and throws a ResourceError when exceeded.
struct Limits {
    /// Candidate pool for minimal-set searches (blocking sets, oracle causes).
    std::size_t set_candidates = 20;
    /// States of a single mechanism node (r^q).
    std::size_t mechanism_states = 1'000'000;
    /// Functional worlds times ordered decision-instance pairs.
    std::size_t world_pairs = 10'000'000;
    /// Entries of a fully enumerated joint distribution.
    std::size_t joint_entries = 1u << 22;
    /// Entries of any intermediate factor in variable elimination.
    std::size_t factor_entries = 1u << 24;
    /// Distinct policies considered by exhaustive policy search.
    std::size_t policy_space = 1'000'000;

    /// Defaults, with CID_CAP_WORLDS (if set to a positive integer)
    /// overriding world_pairs and joint_entries.
    static Limits from_environment();
};

}  // namespace cid
