#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "brt/tree.hpp"

// Full structural validator. Everything here recomputes state from scratch
// by traversal; none of the tree's incremental bookkeeping is trusted.

namespace brt {

struct Violation {
    std::string rule;
    std::string detail;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;
    // Two-level paths where the boundary node itself would have to serve as
    // the termination case; reported but not failed.
    std::vector<Violation> ambiguities;

    int height = 0;
    std::uint64_t internal_nodes = 0;
    std::uint64_t buckets = 0;
    std::uint64_t entries = 0;
    std::uint32_t min_bucket_size = 0;
    std::uint32_t max_bucket_size = 0;
    std::uint64_t doubly_black_nodes = 0;
    std::uint64_t double_red_pairs = 0;

    void fail(const std::string& rule, const std::string& detail) {
        ok = false;
        violations.push_back({rule, detail});
    }
    void note(const std::string& rule, const std::string& detail) {
        ambiguities.push_back({rule, detail});
    }
};

namespace detail {

template <typename Tree>
struct TreeWalk {
    const Tree& t;
    ValidationReport& rep;

    explicit TreeWalk(const Tree& tree, ValidationReport& r) : t(tree), rep(r) {}

    template <typename F>
    void fail_at(const char* rule, NodeHandle h, F&& describe) {
        std::ostringstream os;
        os << (h.is_bucket() ? "bucket " : "node ") << h.index << ": ";
        describe(os);
        rep.fail(rule, os.str());
    }
};

}  // namespace detail

// Checks the coloring properties, the bucket size band, the height bound,
// key ordering, cursor sanity and all redundant bookkeeping.
template <typename Key, typename Compare>
ValidationReport validate(const BucketTree<Key, Compare>& t) {
    using Tree = BucketTree<Key, Compare>;
    ValidationReport rep;
    detail::TreeWalk<Tree> w(t, rep);
    const auto& nodes = t.internal_pool();
    const auto& buckets = t.bucket_pool();
    const auto& entries = t.entry_pool();
    const auto& copies = t.copy_pool();
    const auto& less = t.key_comp();
    const int H = t.height_budget();

    if (t.root().is_none()) {
        rep.fail("root", "tree has no root");
        return rep;
    }

    // root is black and carries no deficit
    if (t.root().is_internal()) {
        const auto& r = nodes[t.root().index];
        if (r.color != Color::black) rep.fail("root-black", "root is red");
        if (r.doubly_black) rep.fail("root-black", "root is doubly-black");
        if (r.parent != npos) rep.fail("links", "root has a parent");
    } else {
        if (buckets[t.root().index].doubly_black)
            rep.fail("root-black", "root bucket is doubly-black");
        if (buckets[t.root().index].parent != npos) rep.fail("links", "root bucket has a parent");
    }

    std::vector<Index> sym_order;          // buckets in symmetric order
    std::vector<int> node_depth(nodes.size(), -1);
    std::uint64_t live_internals = 0;
    int height = 0;

    // recursive descent carrying key bounds
    struct Frame {
        const Tree& t;
        ValidationReport& rep;
        const Compare& less;
        std::vector<Index>& sym_order;
        std::vector<int>& node_depth;
        std::uint64_t& live_internals;
        int& height;

        void walk(NodeHandle h, Index expect_parent, int depth, const Key* lo, const Key* hi) {
            const auto& nodes = t.internal_pool();
            const auto& buckets = t.bucket_pool();
            const auto& entries = t.entry_pool();
            if (h.is_bucket()) {
                const auto& b = buckets[h.index];
                if (!b.live) rep.fail("links", "dangling bucket handle");
                if (b.parent != expect_parent) rep.fail("links", "bucket parent mismatch");
                height = std::max(height, depth);
                sym_order.push_back(h.index);
                // keys sorted and inside the separator window
                Index e = b.head;
                const Key* prev = lo;
                std::uint32_t n = 0;
                while (e != npos) {
                    if (!entries[e].live) rep.fail("links", "dangling entry handle");
                    if (prev && !less(*prev, entries[e].key))
                        rep.fail("order", "bucket keys out of order or outside window");
                    prev = &entries[e].key;
                    n++;
                    e = entries[e].next;
                }
                if (n != b.size) rep.fail("bucket-count", "stored size differs from list length");
                if (hi && prev && less(*hi, *prev))
                    rep.fail("order", "bucket key exceeds separator window");
                return;
            }
            const auto& v = nodes[h.index];
            if (!v.live) rep.fail("links", "dangling internal handle");
            if (v.parent != expect_parent) rep.fail("links", "internal parent mismatch");
            live_internals++;
            node_depth[h.index] = depth;
            if (v.doubly_black && v.color != Color::black)
                rep.fail("color", "doubly-black node is not black");
            if (v.color == Color::red && v.parent != npos &&
                nodes[v.parent].color == Color::red) {
                rep.double_red_pairs++;
                // relaxed rule: a red node under a red parent has black children
                for (NodeHandle c : {v.left, v.right}) {
                    if (c.is_internal() && nodes[c.index].color == Color::red)
                        rep.fail("red-pair-children",
                                 "red node with red parent has a red child");
                }
            }
            if (v.doubly_black) rep.doubly_black_nodes++;
            if (lo && !less(*lo, v.separator)) rep.fail("order", "separator below window");
            if (hi && less(*hi, v.separator)) rep.fail("order", "separator above window");
            walk(v.left, h.index, depth + 1, lo, &v.separator);
            walk(v.right, h.index, depth + 1, &v.separator, hi);
        }
    };

    Frame f{t, rep, less, sym_order, node_depth, live_internals, height};
    f.walk(t.root(), npos, 0, nullptr, nullptr);
    rep.height = height;
    rep.internal_nodes = live_internals;
    rep.buckets = sym_order.size();

    // property (5) needs real black heights; recompute with the tree helper
    for (Index i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].live) continue;
        int bl = t.black_height(nodes[i].left);
        int br = t.black_height(nodes[i].right);
        if (bl - br > 1 || br - bl > 1) {
            std::ostringstream os;
            os << "node " << i << ": child black heights " << bl << " vs " << br;
            rep.fail("black-height", os.str());
        }
    }

    if (live_internals != t.internal_count())
        rep.fail("header", "internal node count out of sync");
    if (sym_order.size() != live_internals + 1)
        rep.fail("header", "bucket count is not n + 1");
    if (t.height_budget() !=
        Tree::compute_height_budget(t.internal_count(), t.config().min_height_budget))
        rep.fail("header", "height budget stale");
    if (height > H) rep.fail("height", "tree height exceeds the budget");
    if (t.internal_count() >= 1000) {
        int raw = static_cast<int>(
            std::ceil(4.32 * std::log2(static_cast<double>(t.internal_count() + 2))));
        if (height > raw) rep.fail("height", "tree height exceeds the logarithmic bound");
    }

    // bucket chain must equal symmetric order
    {
        Index c = t.first_bucket();
        std::size_t i = 0;
        Index prev = npos;
        while (c != npos) {
            if (i >= sym_order.size() || sym_order[i] != c) {
                rep.fail("bucket-chain", "bucket chain disagrees with symmetric order");
                break;
            }
            if (buckets[c].prev_bucket != prev) rep.fail("bucket-chain", "broken prev link");
            prev = c;
            c = buckets[c].next_bucket;
            i++;
        }
        if (rep.ok && i != sym_order.size())
            rep.fail("bucket-chain", "bucket chain shorter than tree");
    }

    // per-bucket checks: size band, markers, copies, cursor sanity
    std::uint64_t total_entries = 0;
    rep.min_bucket_size = sym_order.empty() ? 0 : ~0u;
    rep.max_bucket_size = 0;
    std::vector<std::uint32_t> copy_refs(copies.size(), 0);
    for (Index bi : sym_order) {
        const auto& b = buckets[bi];
        total_entries += b.size;
        rep.min_bucket_size = std::min(rep.min_bucket_size, b.size);
        rep.max_bucket_size = std::max(rep.max_bucket_size, b.size);

        bool is_root_bucket = t.root() == NodeHandle::bucket(bi);
        if (static_cast<int>(b.size) > 2 * H)
            w.fail_at("bucket-size", NodeHandle::bucket(bi),
                      [&](std::ostream& os) { os << "size " << b.size << " above 2H"; });
        if (!is_root_bucket && 2 * static_cast<int>(b.size) < H)
            w.fail_at("bucket-size", NodeHandle::bucket(bi),
                      [&](std::ostream& os) { os << "size " << b.size << " below H/2"; });
        if (b.doubly_black) {
            rep.doubly_black_nodes++;
            if (is_root_bucket) rep.fail("doubly-black", "root bucket carries a deficit");
            if (b.fix_target != NodeHandle::bucket(bi))
                rep.fail("doubly-black", "deficit bucket's cursor is not at itself");
        }

        // middle marker and side counts
        if (!b.tent_active) {
            std::uint32_t l = 0;
            bool seen_middle = b.size == 0;
            Index e = b.head;
            std::uint32_t pos = 0;
            while (e != npos) {
                pos++;
                bool left_side = entries[e].copy == b.copy_left ||
                                 (b.retiring_left != npos && entries[e].copy == b.retiring_left);
                if (left_side) l++;
                bool should_left = !seen_middle;
                if (left_side != should_left)
                    w.fail_at("middle", NodeHandle::bucket(bi), [&](std::ostream& os) {
                        os << "entry " << e << " references the wrong side copy";
                    });
                if (e == b.middle) {
                    seen_middle = true;
                    if (pos != b.left_count)
                        rep.fail("middle", "left count disagrees with middle position");
                }
                e = entries[e].next;
            }
            if (!seen_middle) rep.fail("middle", "middle marker not on the entry list");
            if (l != b.left_count || b.left_count + b.right_count != b.size)
                rep.fail("middle", "side counts out of sync");
            int diff = static_cast<int>(b.left_count) - static_cast<int>(b.right_count);
            if (diff > 2 || diff < -2) rep.fail("middle", "side counts differ by more than two");
        } else {
            // repair mode: swept prefix references the fresh left copy
            Index e = b.head;
            bool in_swept = b.tent != npos;
            std::uint32_t swept = 0;
            while (e != npos) {
                bool is_left = entries[e].copy == b.copy_left;
                if (in_swept) {
                    if (!is_left)
                        rep.fail("tent", "swept entry not on the fresh copy");
                    swept++;
                } else if (is_left) {
                    rep.fail("tent", "unswept entry on the fresh copy");
                }
                if (e == b.tent) in_swept = false;
                e = entries[e].next;
            }
            if (swept != b.tent_left || b.tent_left + b.tent_right != b.size)
                rep.fail("tent", "sweep counts out of sync");
        }

        // copy bookkeeping
        for (Index ci : {b.copy_left, b.copy_right, b.retiring_left, b.retiring_right}) {
            if (ci == npos) continue;
            if (!copies[ci].live || copies[ci].owner != bi)
                rep.fail("copies", "copy owner out of sync");
        }
        if (b.copy_left == npos || b.copy_right == npos)
            rep.fail("copies", "bucket missing an active copy");
        Index e = b.head;
        std::uint32_t refsum = 0;
        while (e != npos) {
            Index ci = entries[e].copy;
            if (ci == npos || !copies[ci].live || copies[ci].owner != bi)
                rep.fail("copies", "entry references a foreign or dead copy");
            else
                copy_refs[ci]++;
            refsum++;
            e = entries[e].next;
        }
        if (refsum != b.size) rep.fail("copies", "reference total differs from size");

        // cursor target is the bucket itself, the root, or a strict ancestor
        NodeHandle target = b.fix_target;
        if (target.is_bucket()) {
            if (target.index != bi) rep.fail("cursor", "cursor points at a foreign bucket");
        } else if (target.is_internal()) {
            bool found = false;
            Index a = b.parent;
            while (a != npos) {
                if (a == target.index) {
                    found = true;
                    break;
                }
                a = nodes[a].parent;
            }
            if (!found)
                w.fail_at("cursor", NodeHandle::bucket(bi), [&](std::ostream& os) {
                    os << "cursor target " << target.index << " is not an ancestor";
                });
        }
    }
    rep.entries = total_entries;
    if (total_entries != t.size()) rep.fail("header", "entry count out of sync");

    for (Index ci = 0; ci < copies.size(); ++ci) {
        if (copies[ci].live && copies[ci].refs != copy_refs[ci])
            rep.fail("copies", "stored refcount differs from live references");
    }

    // every outstanding violation is owned by some bucket's pending fix-ups
    if (rep.doubly_black_nodes > rep.buckets)
        rep.fail("violation-count", "more deficits than buckets");
    if (rep.double_red_pairs > rep.buckets)
        rep.fail("violation-count", "more red pairs than buckets");

    return rep;
}

namespace detail {

// Shared walk for the two termination-case checks. `BelowState` carries the
// per-path scope of the nearest enclosing violation.
template <typename Tree>
int depth_of_target(const Tree& t, Index bucket, const std::vector<int>& depths) {
    NodeHandle h = t.bucket_pool()[bucket].fix_target;
    if (h.is_none()) return -1;  // parked at the root
    if (h.is_bucket()) return 1 << 30;
    return depths[h.index];
}

}  // namespace detail

// On every path from a doubly-black node down to the next doubly-black node
// or to a bucket whose cursor has already passed this node, a red node must
// intervene; it blocks a second deficit from reaching the first.
template <typename Key, typename Compare>
ValidationReport check_deficit_terminations(const BucketTree<Key, Compare>& t) {
    ValidationReport rep;
    const auto& nodes = t.internal_pool();
    const auto& buckets = t.bucket_pool();
    if (t.root().is_none()) return rep;

    std::vector<int> depths(nodes.size(), -1);

    struct Walker {
        const BucketTree<Key, Compare>& t;
        ValidationReport& rep;
        std::vector<int>& depths;

        void walk(NodeHandle h, int depth, int anchor_depth, bool red_seen) {
            const auto& nodes = t.internal_pool();
            const auto& buckets = t.bucket_pool();
            if (h.is_bucket()) {
                const auto& b = buckets[h.index];
                bool covered = anchor_depth < 0 || red_seen;
                if (!covered && b.doubly_black) {
                    if (depth - anchor_depth <= 1)
                        rep.note("deficit-termination", "deficit bucket directly under a deficit node");
                    else
                        rep.fail("deficit-termination", "two deficits on one path without a red between");
                    return;
                }
                if (!covered) {
                    int td = detail::depth_of_target(t, h.index, depths);
                    bool non_proper = td < anchor_depth;
                    if (non_proper) {
                        if (depth - anchor_depth <= 1)
                            rep.note("deficit-termination",
                                     "passed-over bucket directly under a deficit node");
                        else
                            rep.fail("deficit-termination",
                                     "no red between a deficit and a passed-over bucket");
                    }
                }
                return;
            }
            const auto& v = nodes[h.index];
            depths[h.index] = depth;
            if (v.color == Color::red) red_seen = true;
            if (v.doubly_black) {
                if (anchor_depth >= 0 && !red_seen)
                    rep.fail("deficit-termination", "two deficits on one path without a red between");
                anchor_depth = depth;
                red_seen = false;
            }
            walk(v.left, depth + 1, anchor_depth, red_seen);
            walk(v.right, depth + 1, anchor_depth, red_seen);
        }
    };
    Walker w{t, rep, depths};
    w.walk(t.root(), 0, -1, false);
    return rep;
}

// Mirror check for red pairs: two consecutive black nodes or a doubly-black
// node must sit between a red pair and any descendant red pair or
// passed-over bucket.
template <typename Key, typename Compare>
ValidationReport check_red_pair_terminations(const BucketTree<Key, Compare>& t) {
    ValidationReport rep;
    const auto& nodes = t.internal_pool();
    if (t.root().is_none()) return rep;

    std::vector<int> depths(nodes.size(), -1);

    struct Walker {
        const BucketTree<Key, Compare>& t;
        ValidationReport& rep;
        std::vector<int>& depths;

        void walk(NodeHandle h, int depth, int anchor_depth, bool terminated, bool prev_black) {
            const auto& nodes = t.internal_pool();
            const auto& buckets = t.bucket_pool();
            if (h.is_bucket()) {
                const auto& b = buckets[h.index];
                if (anchor_depth >= 0 && !terminated) {
                    int td = detail::depth_of_target(t, h.index, depths);
                    bool non_proper = td < anchor_depth;
                    if (non_proper) {
                        if (depth - anchor_depth <= 1 || prev_black || b.doubly_black)
                            rep.note("red-pair-termination",
                                     "termination for a red pair only at the path boundary");
                        else
                            rep.fail("red-pair-termination",
                                     "no termination between a red pair and a passed-over bucket");
                    }
                }
                return;
            }
            const auto& v = nodes[h.index];
            depths[h.index] = depth;
            bool black = v.color == Color::black;
            bool red_pair = v.color == Color::red && v.parent != npos &&
                            nodes[v.parent].color == Color::red;
            if (red_pair) {
                if (anchor_depth >= 0 && !terminated)
                    rep.fail("red-pair-termination", "two red pairs on one path without termination");
                anchor_depth = depth;
                terminated = false;
                prev_black = false;
            } else {
                if (v.doubly_black || (black && prev_black)) terminated = true;
                prev_black = black;
            }
            walk(v.left, depth + 1, anchor_depth, terminated, prev_black);
            walk(v.right, depth + 1, anchor_depth, terminated, prev_black);
        }
    };
    Walker w{t, rep, depths};
    w.walk(t.root(), 0, -1, true, false);
    return rep;
}

}  // namespace brt
