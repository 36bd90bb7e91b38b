#pragma once

// Per-update O(1) fix-up machinery: one dispatcher step per call, plus the
// double-red and doubly-black case tables. Each call either removes the
// violation at the cursor's node or hands it to an ancestor; the cursor then
// advances one level toward the root.

namespace brt {

template <typename K, typename C>
typename BucketTree<K, C>::FixupOutcome BucketTree<K, C>::fixup_step(Index bucket) {
    WorkCounter before = counters_;
    FixupKind kind = FixupKind::no_violation;
    NodeHandle v = buckets_[bucket].fix_target;
    if (!v.is_none()) {
        if (v == root_) {
            set_fix_target(bucket, NodeHandle::none());
        } else if (v.is_bucket()) {
            BRT_CHECK(v.index == bucket, "fixing cursor may only target its own bucket");
            if (buckets_[bucket].doubly_black) kind = doubly_black_fixup(v);
            Index p = buckets_[bucket].parent;
            set_fix_target(bucket, p == npos ? NodeHandle::none() : NodeHandle::internal(p));
        } else {
            const InternalNode& node = internals_[v.index];
            Index p = node.parent;
            if (node.color == Color::red && p != npos && internals_[p].color == Color::red)
                kind = double_red_fixup(v.index);
            else if (node.doubly_black)
                kind = doubly_black_fixup(v);
            // advance to the node's parent in the post-case topology
            Index np = internals_[v.index].parent;
            set_fix_target(bucket, np == npos ? NodeHandle::none() : NodeHandle::internal(np));
        }
    }
    counters_.fixup_steps++;
    WorkCounter delta = counters_ - before;
    instr_.max_step_rotations =
        std::max(instr_.max_step_rotations, static_cast<std::uint32_t>(delta.rotations));
    instr_.max_step_recolorings =
        std::max(instr_.max_step_recolorings, static_cast<std::uint32_t>(delta.recolorings));
    return {kind, delta};
}

template <typename K, typename C>
int BucketTree<K, C>::push_cursor_to_root(Index bucket) {
    int steps = 0;
    while (!cursor_at_root(bucket)) {
        fixup_step(bucket);
        ++steps;
        BRT_CHECK(steps <= height_budget_ + 64, "cursor failed to reach the root");
    }
    instr_.max_push_steps = std::max(instr_.max_push_steps, static_cast<std::uint32_t>(steps));
    if (config_.push_cap > 0 && steps > config_.push_cap) instr_.push_cap_violations++;
    return steps;
}

// N red with red parent P; grandparent G exists because the root is black.
// Cases follow the classic table, restricted to a single iteration, with two
// extra cases for a doubly-black grandparent.
template <typename K, typename C>
typename BucketTree<K, C>::FixupKind BucketTree<K, C>::double_red_fixup(Index n) {
    Index p = internals_[n].parent;
    BRT_CHECK(p != npos && internals_[p].color == Color::red, "double-red fix-up needs a red pair");
    Index g = internals_[p].parent;
    BRT_CHECK(g != npos, "red node cannot be the root");

    Side pside = side_of_child(g, NodeHandle::internal(p));
    NodeHandle u = child(g, other(pside));
    bool u_red = u.is_internal() && internals_[u.index].color == Color::red;

    if (u_red) {
        // Case 1 / 1.1: recolor the red pair's parent level
        set_node_color(p, Color::black);
        set_node_color(u.index, Color::black);
        if (internals_[g].doubly_black) {
            // the grandparent's deficit is paid off by the new black children
            set_node_db(g, false);
            return FixupKind::resolved;
        }
        if (internals_[g].parent == npos) return FixupKind::resolved;  // root stays black
        set_node_color(g, Color::red);
        Index gp = internals_[g].parent;
        return internals_[gp].color == Color::red ? FixupKind::propagated_to_grandparent
                                                  : FixupKind::resolved;
    }

    Side nside = side_of_child(p, NodeHandle::internal(n));
    if (nside != pside) {
        // Case 2: rotate the inner red child outward, then continue as Case 3
        // with the roles of the two red nodes swapped.
        if (pside == Side::left)
            rotate_left(p);
        else
            rotate_right(p);
    }
    Index top = child(g, pside).index;  // red node that will rise above G
    bool g_db = internals_[g].doubly_black;
    if (pside == Side::left)
        rotate_right(g);
    else
        rotate_left(g);
    if (g_db) {
        // Case 3.1: trade the red pair for a deficit at the same spot
        set_node_db(g, false);
        set_node_color(g, Color::red);
        set_node_color(top, Color::black);
        set_node_db(top, true);
    } else {
        // Case 3: switch the colors of the risen node and G
        set_node_color(top, Color::black);
        set_node_color(g, Color::red);
    }
    return FixupKind::resolved;
}

template <typename K, typename C>
typename BucketTree<K, C>::FixupKind BucketTree<K, C>::absorb_at_parent(Index p) {
    if (internals_[p].color == Color::red) {
        set_node_color(p, Color::black);
        return FixupKind::resolved;
    }
    if (internals_[p].parent == npos) return FixupKind::resolved;  // root absorbs the deficit
    set_node_db(p, true);
    return FixupKind::propagated_to_parent;
}

// N carries a doubly-black deficit (internal node or bucket). One iteration:
// red siblings are rotated away first (at most twice), then the terminal
// case runs against the final sibling.
template <typename K, typename C>
typename BucketTree<K, C>::FixupKind BucketTree<K, C>::doubly_black_fixup(NodeHandle n) {
    bool n_db = n.is_bucket() ? buckets_[n.index].doubly_black : internals_[n.index].doubly_black;
    BRT_CHECK(n_db, "doubly-black fix-up on a node without the flag");
    Index p = parent_of(n);
    BRT_CHECK(p != npos, "the root is never doubly-black");
    BRT_CHECK(!internals_[p].doubly_black, "adjacent doubly-black nodes");

    auto clear_n = [&] {
        if (n.is_bucket())
            set_bucket_db(n.index, false);
        else
            set_node_db(n.index, false);
    };

    // Case 1 / 1.1: red sibling — rotate it above the parent. The new
    // sibling may be red once more; a third repetition is impossible since
    // a red node under a red parent has black children.
    int reps = 0;
    for (;;) {
        Side nside = side_of_child(p, n);
        NodeHandle s = child(p, other(nside));
        if (!(s.is_internal() && internals_[s.index].color == Color::red)) break;
        BRT_CHECK(++reps <= 2, "red sibling cannot appear a third time");
        bool p_red = internals_[p].color == Color::red;
        if (nside == Side::left)
            rotate_left(p);
        else
            rotate_right(p);
        if (!p_red) {  // Case 1 recolors; Case 1.1 (red parent) does not
            set_node_color(s.index, Color::black);
            set_node_color(p, Color::red);
        }
    }

    Side nside = side_of_child(p, n);
    NodeHandle s = child(p, other(nside));

    bool s_db = s.is_bucket() ? buckets_[s.index].doubly_black : internals_[s.index].doubly_black;
    if (s_db) {
        // Case 1.2: both children carry a deficit; pool it at the parent.
        if (s.is_bucket())
            set_bucket_db(s.index, false);
        else
            set_node_db(s.index, false);
        clear_n();
        return absorb_at_parent(p);
    }

    if (s.is_bucket()) {
        // Sibling is a leaf: nothing below it can re-balance, and leaves stay
        // black, so the deficit simply moves to the parent. The resulting
        // height difference of one is legal.
        clear_n();
        return absorb_at_parent(p);
    }

    Index si = s.index;
    NodeHandle outer = child(si, other(nside));
    NodeHandle inner = child(si, nside);
    bool outer_red = outer.is_internal() && internals_[outer.index].color == Color::red;
    bool inner_red = inner.is_internal() && internals_[inner.index].color == Color::red;

    if (!outer_red && !inner_red) {
        // Case 2: recolor the sibling red and push the deficit up
        set_node_color(si, Color::red);
        clear_n();
        return absorb_at_parent(p);
    }

    if (!outer_red) {
        // Case 3: rotate the red inner child above the sibling, swap their
        // colors, and fall through to Case 4.
        Index risen = inner.index;
        if (nside == Side::left)
            rotate_right(si);
        else
            rotate_left(si);
        set_node_color(risen, Color::black);
        set_node_color(si, Color::red);
        si = risen;
        outer = child(si, other(nside));
    }

    // Case 4: the sibling's outer child is red — one rotation restores the
    // missing black on N's side.
    set_node_color(si, internals_[p].color);
    set_node_color(p, Color::black);
    set_node_color(outer.index, Color::black);
    if (nside == Side::left)
        rotate_left(p);
    else
        rotate_right(p);
    clear_n();
    return FixupKind::resolved;
}

}  // namespace brt
