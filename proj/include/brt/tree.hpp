#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "brt/types.hpp"

namespace brt {

// Ordered set stored as a relaxed red-black tree whose leaves are buckets of
// sorted, doubly-linked entries. Internal nodes carry routing keys only.
// Once the position of an update is known, insertion and deletion perform a
// constant amount of structural work: violations of the classic red-black
// rules (red-red pairs, black-height deficits) are tolerated and repaired
// incrementally, one fix-up step per update, driven by a per-bucket fixing
// cursor that climbs toward the root. A background scan visits two buckets
// per update to keep every bucket inside its size band as the height budget
// drifts with the node count.
//
// Single mutator, no internal synchronization; read-only traversal is safe
// only while no update is in progress.
template <typename Key, typename Compare = std::less<Key>>
class BucketTree {
public:
    struct InternalNode {
        Key separator{};
        NodeHandle left{};
        NodeHandle right{};
        Index parent = npos;  // internal slot; npos at the root
        Color color = Color::red;
        bool doubly_black = false;
        bool live = false;
        Index watch_head = npos;  // buckets whose fixing cursor targets this node
        Index free_next = npos;
    };

    // One fixing-pointer copy. A bucket keeps two live copies (left/right of
    // its middle marker) so every entry can reach the cursor in O(1); merges
    // leave up to four until consolidation re-references the entries.
    struct CursorCopy {
        Index owner = npos;  // bucket slot
        Side side = Side::left;
        std::uint32_t refs = 0;
        bool live = false;
        Index free_next = npos;
    };

    struct Entry {
        Key key{};
        Index prev = npos;
        Index next = npos;
        Index copy = npos;  // CursorCopy this entry references
        std::uint32_t gen = 0;
        bool live = false;
        Index free_next = npos;
    };

    struct Bucket {
        Index head = npos, tail = npos, middle = npos;
        std::uint32_t size = 0;
        std::uint32_t left_count = 0, right_count = 0;  // middle belongs to the left side

        // Post-split repair: sweep from the head toward the true middle,
        // re-referencing passed entries to the fresh left copy.
        bool tent_active = false;
        Index tent = npos;  // last swept entry; npos = nothing swept yet
        std::uint32_t tent_left = 0, tent_right = 0;

        Index copy_left = npos, copy_right = npos;
        Index retiring_left = npos, retiring_right = npos;
        Index walk_left = npos, walk_right = npos;  // consolidation positions

        bool doubly_black = false;
        Index parent = npos;  // internal slot; npos when the bucket is the root
        Index prev_bucket = npos, next_bucket = npos;

        NodeHandle fix_target{};  // none = parked at the root
        Index watch_prev = npos, watch_next = npos;

        // update spacing instrumentation (reset on restructure / budget change)
        std::uint32_t inserts_since = 0, deletes_since = 0;
        std::uint32_t size_at_epoch = 0;
        std::uint64_t counter_epoch = 0;
        bool restructured_in_epoch = false;

        bool live = false;
        Index free_next = npos;
    };

    enum class FixupKind : std::uint8_t {
        no_violation,
        resolved,
        propagated_to_parent,
        propagated_to_grandparent,
    };

    struct FixupOutcome {
        FixupKind kind = FixupKind::no_violation;
        WorkCounter steps{};
    };

    enum class InsertStatus : std::uint8_t { inserted, duplicate, bad_position };

    struct InsertResult {
        EntryLocator loc{};
        InsertStatus status = InsertStatus::inserted;
        bool inserted() const { return status == InsertStatus::inserted; }
    };

    struct SearchResult {
        bool found = false;
        EntryLocator loc{};
        Index bucket = npos;
        Index before = npos;  // insertion point when not found (npos = bucket tail)
        int comparisons = 0;  // internal nodes visited + bucket entries examined
        int path_length = 0;
    };

    struct Descend {
        Index bucket = npos;
        int path_length = 0;
    };

    // Structural event log used by the test and benchmark harnesses.
    struct Instrumentation {
        std::uint64_t splits = 0, merges = 0, borrows = 0, sibling_rotations = 0;
        std::uint64_t split_size_violations = 0;  // result outside [H-5, H]
        std::uint64_t merge_size_violations = 0;  // result outside [H, H+6)
        std::uint32_t max_push_steps = 0;
        std::uint64_t push_cap_violations = 0;
        std::uint64_t budget_increases = 0, budget_decreases = 0;
        std::uint32_t max_settle_steps = 0;
        std::uint32_t max_step_rotations = 0;
        std::uint32_t max_step_recolorings = 0;
        // splits/merges that qualify for the post-budget-change spacing bound
        std::uint64_t qualified_splits = 0;
        std::uint32_t min_inserts_before_split = std::numeric_limits<std::uint32_t>::max();
        std::uint64_t qualified_merges = 0;
        std::uint32_t min_deletes_before_merge = std::numeric_limits<std::uint32_t>::max();
    };

    explicit BucketTree(TreeConfig cfg = {}, Compare cmp = {});

    // ---- queries ----
    std::size_t size() const { return n_entries_; }
    bool empty() const { return n_entries_ == 0; }
    std::uint32_t internal_count() const { return n_internal_; }
    int height_budget() const { return height_budget_; }
    static int compute_height_budget(std::uint64_t n, int floor_value);

    SearchResult search(const Key& key) const;
    bool contains(const Key& key) const { return search(key).found; }
    Descend search_descend(const Key& key) const;

    // ---- updates ----
    InsertResult insert_key(const Key& key);
    InsertResult insert_at(Index bucket, Index before, const Key& key);
    bool erase_key(const Key& key);
    Key erase_at(EntryLocator loc);

    // ---- entry navigation ----
    EntryLocator first() const;
    EntryLocator last() const;
    EntryLocator next(EntryLocator loc) const;
    EntryLocator prev(EntryLocator loc) const;
    const Key& key_of(EntryLocator loc) const;
    bool locator_live(EntryLocator loc) const;

    const WorkCounter& counters() const { return counters_; }
    const Instrumentation& instrumentation() const { return instr_; }
    const TreeConfig& config() const { return config_; }
    const Compare& key_comp() const { return less_; }

    // ------------------------------------------------------------------
    // Internal machinery. Exposed so the validator, the tests, and the
    // bindings can inspect or drive the structure directly.
    // ------------------------------------------------------------------

    const std::vector<InternalNode>& internal_pool() const { return internals_; }
    const std::vector<Bucket>& bucket_pool() const { return buckets_; }
    const std::vector<Entry>& entry_pool() const { return entries_; }
    const std::vector<CursorCopy>& copy_pool() const { return copies_; }
    NodeHandle root() const { return root_; }
    Index first_bucket() const { return first_bucket_; }
    Index scan_cursor() const { return scan_cursor_; }

    NodeHandle rotate_left(Index x);
    NodeHandle rotate_right(Index x);
    int black_height(NodeHandle h) const;

    FixupOutcome fixup_step(Index bucket);
    FixupKind double_red_fixup(Index node);
    FixupKind doubly_black_fixup(NodeHandle node);
    int push_cursor_to_root(Index bucket);

    Index bucket_insert_entry(Index bucket, Index before, const Key& key);
    Key bucket_remove_entry(Index bucket, Index entry);
    void redirect_cursor_refs(Index bucket);
    void settle_for_restructure(Index bucket);

    void split_bucket(Index bucket);
    Index merge_buckets(Index bucket, Index sibling);
    void borrow_from_sibling(Index bucket, Index sibling);
    Index ensure_bucket_sibling(Index bucket);
    void global_scan_step();

    struct BucketProbe {
        bool found = false;
        Index entry = npos;
        Index before = npos;
        int comparisons = 0;
    };
    BucketProbe bucket_search(Index bucket, const Key& key) const;

    // Raw construction hooks for hand-built trees in tests. They bypass the
    // update algorithms; raw_finalize wires derived state afterwards.
    Index raw_new_bucket(const std::vector<Key>& keys);
    Index raw_new_internal(Color c, const Key& sep, NodeHandle l, NodeHandle r,
                           bool doubly_black = false);
    void raw_set_root(NodeHandle h);
    void raw_set_cursor(Index bucket, NodeHandle target);
    void raw_set_doubly_black(NodeHandle h, bool flag);
    void raw_finalize();

private:
    // store management
    Index alloc_internal();
    void free_internal(Index i);
    Index alloc_bucket();
    void free_bucket(Index b);
    Index alloc_entry(const Key& key);
    void free_entry(Index e);
    Index alloc_copy(Index owner, Side side);
    void free_copy(Index c);

    // link helpers
    NodeHandle child(Index node, Side s) const;
    void set_child(Index node, Side s, NodeHandle c);
    Side side_of_child(Index parent, NodeHandle c) const;
    void replace_child(Index parent, NodeHandle expected, NodeHandle next);
    Index parent_of(NodeHandle h) const;
    NodeHandle sibling_of(NodeHandle h) const;

    void set_node_color(Index node, Color c);
    void set_node_db(Index node, bool flag);
    void set_bucket_db(Index bucket, bool flag);

    // cursor registry
    void register_watcher(Index bucket, Index node);
    void unregister_watcher(Index bucket);
    void set_fix_target(Index bucket, NodeHandle target);
    void move_watchers(Index from_node, Index to_node);
    bool cursor_at_root(Index bucket) const { return buckets_[bucket].fix_target.is_none(); }

    // bucket internals
    void link_entry(Index bucket, Index before, Index entry);
    void unlink_entry(Index bucket, Index entry);
    void set_entry_copy(Index entry, Index copy);
    void detach_entry(Index bucket, Index entry);
    void attach_entry_edge(Index bucket, Index entry, Side edge);
    void rebalance_middle(Index bucket);
    bool advance_tent(Index bucket);
    bool consolidate_step(Index bucket, Side side);
    void touch_epoch(Index bucket);
    void mark_restructured(Index bucket);
    FixupKind absorb_at_parent(Index parent_node);

    void update_height_budget();
    bool oversized(Index bucket) const {
        return static_cast<int>(buckets_[bucket].size) > 2 * height_budget_ - 10;
    }
    bool undersized(Index bucket) const {
        return 2 * static_cast<int>(buckets_[bucket].size) < height_budget_ + 6;
    }
    bool sibling_rich(Index bucket) const {
        return 2 * static_cast<int>(buckets_[bucket].size) > height_budget_ + 6;
    }

    void handle_underflow(Index bucket);
    void note_split_sizes(std::uint32_t left, std::uint32_t right);
    void note_merge_size(std::uint32_t merged);
    void note_split_spacing(Index bucket);
    void note_merge_spacing(Index b1, Index b2);
    EntryLocator locator(Index entry) const { return {entry, entries_[entry].gen}; }
    Index owner_bucket(Index entry) const { return copies_[entries_[entry].copy].owner; }

    std::vector<InternalNode> internals_;
    std::vector<Bucket> buckets_;
    std::vector<Entry> entries_;
    std::vector<CursorCopy> copies_;
    Index internal_free_ = npos;
    Index bucket_free_ = npos;
    Index entry_free_ = npos;
    Index copy_free_ = npos;

    NodeHandle root_{};
    std::uint32_t n_internal_ = 0;
    std::size_t n_entries_ = 0;
    int height_budget_ = 0;
    Index scan_cursor_ = npos;
    Index first_bucket_ = npos;

    WorkCounter counters_{};
    Instrumentation instr_{};
    TreeConfig config_{};
    Compare less_{};

    std::uint64_t epoch_ = 0;  // bumped whenever the height budget changes
    bool last_change_increase_ = false;
};

}  // namespace brt

#include "brt/impl/tree_core.ipp"
#include "brt/impl/tree_bucket.ipp"
#include "brt/impl/tree_fixup.ipp"
#include "brt/impl/tree_maint.ipp"
