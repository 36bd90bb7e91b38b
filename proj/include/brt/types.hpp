#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace brt {

using Index = std::uint32_t;
inline constexpr Index npos = 0xffffffffu;

enum class NodeKind : std::uint8_t { none = 0, internal = 1, bucket = 2 };

// Handle into the tree's slot stores. `none` doubles as "no node" and,
// for fixing cursors, as "parked at the root".
struct NodeHandle {
    Index index = npos;
    NodeKind kind = NodeKind::none;

    static NodeHandle internal(Index i) { return {i, NodeKind::internal}; }
    static NodeHandle bucket(Index i) { return {i, NodeKind::bucket}; }
    static NodeHandle none() { return {}; }

    bool is_none() const { return kind == NodeKind::none; }
    bool is_internal() const { return kind == NodeKind::internal; }
    bool is_bucket() const { return kind == NodeKind::bucket; }

    friend bool operator==(const NodeHandle& a, const NodeHandle& b) {
        return a.kind == b.kind && (a.kind == NodeKind::none || a.index == b.index);
    }
    friend bool operator!=(const NodeHandle& a, const NodeHandle& b) { return !(a == b); }
};

enum class Color : std::uint8_t { red, black };

enum class Side : std::uint8_t { left, right };

inline Side other(Side s) { return s == Side::left ? Side::right : Side::left; }

// Opaque reference to one stored key. Generation-checked so stale
// locators are detected instead of corrupting the entry pool.
struct EntryLocator {
    Index entry = npos;
    std::uint32_t gen = 0;

    bool valid() const { return entry != npos; }
    friend bool operator==(const EntryLocator& a, const EntryLocator& b) {
        return a.entry == b.entry && a.gen == b.gen;
    }
};

// Per-operation structural work tally; the empirical witness that update
// cost does not grow with tree size.
struct WorkCounter {
    std::uint64_t rotations = 0;
    std::uint64_t recolorings = 0;
    std::uint64_t fixup_steps = 0;
    std::uint64_t entry_moves = 0;
    std::uint64_t cursor_redirects = 0;

    std::uint64_t total() const {
        return rotations + recolorings + fixup_steps + entry_moves + cursor_redirects;
    }
    friend WorkCounter operator-(const WorkCounter& a, const WorkCounter& b) {
        return {a.rotations - b.rotations, a.recolorings - b.recolorings,
                a.fixup_steps - b.fixup_steps, a.entry_moves - b.entry_moves,
                a.cursor_redirects - b.cursor_redirects};
    }
};

struct TreeConfig {
    // Floor for the height budget. Keeps the split/merge thresholds coherent
    // on tiny trees, where the formula alone would make them overlap.
    int min_height_budget = 12;
    // Fix-up calls granted to each bucket visited by the background scan.
    int scan_fixups = 11;
    // Buckets visited by the scan per update.
    int scan_buckets = 2;
    // After a split, run the immediate fix-up for the left (true) or right bucket.
    bool split_fixup_left = true;
    // Cap asserted on push-to-root step counts when nonzero.
    int push_cap = 11;
};

// Thrown when an internal structural contract is broken. Callers map this
// to a distinct process exit code.
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

#define BRT_CHECK(cond, msg)                                                   \
    do {                                                                       \
        if (!(cond)) throw ::brt::ContractViolation(msg);                      \
    } while (0)

}  // namespace brt
