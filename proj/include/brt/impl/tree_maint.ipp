#pragma once

// Update algorithms: position-known insertion and deletion, bucket
// splitting, merging and borrowing, and the background scan that repairs
// size and cursor debt left behind when the height budget moves.

namespace brt {

template <typename K, typename C>
typename BucketTree<K, C>::InsertResult BucketTree<K, C>::insert_key(const K& key) {
    Descend d = search_descend(key);
    BucketProbe p = bucket_search(d.bucket, key);
    if (p.found) return {locator(p.entry), InsertStatus::duplicate};
    return insert_at(d.bucket, p.before, key);
}

template <typename K, typename C>
typename BucketTree<K, C>::InsertResult BucketTree<K, C>::insert_at(Index bucket, Index before,
                                                                    const K& key) {
    // neighbours must bracket the key strictly; the successor of a tail
    // position lives in the next bucket
    Index prev = before == npos ? buckets_[bucket].tail : entries_[before].prev;
    Index succ = before;
    if (succ == npos) {
        Index nb = buckets_[bucket].next_bucket;
        while (nb != npos && buckets_[nb].size == 0) nb = buckets_[nb].next_bucket;
        if (nb != npos) succ = buckets_[nb].head;
    }
    if (prev == npos && buckets_[bucket].prev_bucket != npos) {
        Index pb = buckets_[bucket].prev_bucket;
        while (pb != npos && buckets_[pb].size == 0) pb = buckets_[pb].prev_bucket;
        if (pb != npos) prev = buckets_[pb].tail;
    }
    if (prev != npos) {
        if (!less_(entries_[prev].key, key))
            return {locator(prev),
                    less_(key, entries_[prev].key) ? InsertStatus::bad_position
                                                   : InsertStatus::duplicate};
    }
    if (succ != npos) {
        if (!less_(key, entries_[succ].key))
            return {locator(succ),
                    less_(entries_[succ].key, key) ? InsertStatus::bad_position
                                                   : InsertStatus::duplicate};
    }

    touch_epoch(bucket);
    buckets_[bucket].inserts_since++;
    Index e = bucket_insert_entry(bucket, before, key);
    n_entries_++;
    redirect_cursor_refs(bucket);
    fixup_step(bucket);
    if (oversized(bucket)) {
        push_cursor_to_root(bucket);
        split_bucket(bucket);
    }
    global_scan_step();
    return {locator(e), InsertStatus::inserted};
}

template <typename K, typename C>
bool BucketTree<K, C>::erase_key(const K& key) {
    Descend d = search_descend(key);
    BucketProbe p = bucket_search(d.bucket, key);
    if (!p.found) return false;
    erase_at(locator(p.entry));
    return true;
}

template <typename K, typename C>
K BucketTree<K, C>::erase_at(EntryLocator loc) {
    if (!locator_live(loc)) throw std::invalid_argument("erase_at: stale entry locator");
    Index bucket = owner_bucket(loc.entry);
    touch_epoch(bucket);
    buckets_[bucket].deletes_since++;
    K key = bucket_remove_entry(bucket, loc.entry);
    n_entries_--;
    redirect_cursor_refs(bucket);
    fixup_step(bucket);
    fixup_step(bucket);
    if (buckets_[bucket].parent != npos && undersized(bucket)) handle_underflow(bucket);
    global_scan_step();
    return key;
}

template <typename K, typename C>
void BucketTree<K, C>::handle_underflow(Index bucket) {
    push_cursor_to_root(bucket);
    Index sib = ensure_bucket_sibling(bucket);
    if (sibling_rich(sib)) {
        borrow_from_sibling(bucket, sib);
    } else {
        merge_buckets(bucket, sib);
    }
}

// ---- split ----

template <typename K, typename C>
void BucketTree<K, C>::split_bucket(Index b) {
    BRT_CHECK(cursor_at_root(b), "split requires the cursor at the root");
    settle_for_restructure(b);
    BRT_CHECK(!buckets_[b].tent_active && buckets_[b].retiring_left == npos &&
                  buckets_[b].retiring_right == npos,
              "split on an unsettled bucket");
    BRT_CHECK(buckets_[b].size >= 2 && buckets_[b].middle != npos, "split needs a valid middle");

    note_split_spacing(b);

    Index rb = alloc_bucket();
    Bucket& lbk = buckets_[b];
    Bucket& rbk = buckets_[rb];

    std::uint32_t ls = lbk.left_count;
    std::uint32_t rs = lbk.right_count;
    note_split_sizes(ls, rs);

    // the middle entry stays as the left bucket's tail; its key is copied up
    K sep = entries_[lbk.middle].key;
    Index rhead = entries_[lbk.middle].next;
    BRT_CHECK(rhead != npos, "split right half is empty");
    entries_[lbk.middle].next = npos;
    entries_[rhead].prev = npos;
    rbk.head = rhead;
    rbk.tail = lbk.tail;
    rbk.size = rs;
    lbk.tail = lbk.middle;
    lbk.size = ls;

    // each side keeps the copy its entries already reference; that copy
    // becomes the side's right copy and a fresh left copy starts empty
    Index old_left = lbk.copy_left;
    Index old_right = lbk.copy_right;
    BRT_CHECK(copies_[old_left].refs == ls && copies_[old_right].refs == rs,
              "copy refcounts out of sync at split");
    copies_[old_left].side = Side::right;
    copies_[old_right].owner = rb;

    lbk.copy_right = old_left;
    lbk.copy_left = alloc_copy(b, Side::left);
    lbk.middle = npos;
    lbk.left_count = lbk.right_count = 0;
    lbk.tent_active = true;
    lbk.tent = npos;
    lbk.tent_left = 0;
    lbk.tent_right = ls;

    rbk.copy_right = old_right;
    rbk.copy_left = alloc_copy(rb, Side::left);
    rbk.middle = npos;
    rbk.tent_active = true;
    rbk.tent = npos;
    rbk.tent_left = 0;
    rbk.tent_right = rs;

    // bucket chain: rb follows b
    rbk.prev_bucket = b;
    rbk.next_bucket = lbk.next_bucket;
    if (lbk.next_bucket != npos) buckets_[lbk.next_bucket].prev_bucket = rb;
    lbk.next_bucket = rb;

    // new red router node takes the old bucket's place
    Index parent = lbk.parent;
    Index m = alloc_internal();
    internals_[m].separator = sep;
    internals_[m].color = Color::red;
    set_child(m, Side::left, NodeHandle::bucket(b));
    set_child(m, Side::right, NodeHandle::bucket(rb));
    if (parent == npos) {
        internals_[m].parent = npos;
        internals_[m].color = Color::black;  // the root stays black
        root_ = NodeHandle::internal(m);
    } else {
        replace_child(parent, NodeHandle::bucket(b), NodeHandle::internal(m));
    }

    set_fix_target(b, NodeHandle::internal(m));
    set_fix_target(rb, NodeHandle::internal(m));

    n_internal_++;
    update_height_budget();
    instr_.splits++;
    mark_restructured(b);
    mark_restructured(rb);

    // dismiss a possible double-red pair created just above the buckets
    fixup_step(config_.split_fixup_left ? b : rb);
}

// ---- deletion-side restructuring ----

// Guarantees the bucket's tree sibling is a bucket. When it is a router
// node instead, that node is red with two bucket children, and one rotation
// of the parent brings a bucket alongside.
template <typename K, typename C>
Index BucketTree<K, C>::ensure_bucket_sibling(Index b) {
    Index p = buckets_[b].parent;
    BRT_CHECK(p != npos, "root bucket has no sibling");
    Side bs = side_of_child(p, NodeHandle::bucket(b));
    NodeHandle sib = child(p, other(bs));
    if (sib.is_bucket()) return sib.index;

    Index s = sib.index;
    BRT_CHECK(internals_[s].color == Color::red && internals_[s].left.is_bucket() &&
                  internals_[s].right.is_bucket(),
              "bucket sibling must be red over two buckets");
    // exchange colors (and any deficit flag) so black heights are preserved
    Color pc = internals_[p].color;
    bool pdb = internals_[p].doubly_black;
    set_node_color(p, internals_[s].color);
    set_node_db(p, internals_[s].doubly_black);
    set_node_color(s, pc);
    set_node_db(s, pdb);
    if (bs == Side::left)
        rotate_left(p);
    else
        rotate_right(p);
    instr_.sibling_rotations++;
    sib = child(p, other(bs));
    BRT_CHECK(sib.is_bucket(), "rotation must yield a bucket sibling");
    return sib.index;
}

template <typename K, typename C>
void BucketTree<K, C>::borrow_from_sibling(Index b, Index sib) {
    Index p = buckets_[b].parent;
    BRT_CHECK(p != npos && p == buckets_[sib].parent, "borrow needs sibling buckets");
    Side bs = side_of_child(p, NodeHandle::bucket(b));
    if (bs == Side::left) {
        // take the right sibling's first entry; the separator becomes the
        // moved key, the new maximum of the left child
        Index e = buckets_[sib].head;
        BRT_CHECK(e != npos, "borrow from empty sibling");
        detach_entry(sib, e);
        attach_entry_edge(b, e, Side::right);
        internals_[p].separator = entries_[e].key;
    } else {
        // take the left sibling's last entry; the separator becomes the
        // remaining maximum of the left child
        Index e = buckets_[sib].tail;
        BRT_CHECK(e != npos, "borrow from empty sibling");
        detach_entry(sib, e);
        attach_entry_edge(b, e, Side::left);
        BRT_CHECK(buckets_[sib].tail != npos, "borrow drained the sibling");
        internals_[p].separator = entries_[buckets_[sib].tail].key;
    }
    redirect_cursor_refs(b);
    redirect_cursor_refs(sib);
    fixup_step(sib);
    fixup_step(sib);
    instr_.borrows++;
    mark_restructured(b);
    mark_restructured(sib);
}

template <typename K, typename C>
Index BucketTree<K, C>::merge_buckets(Index b, Index sib) {
    Index p = buckets_[b].parent;
    BRT_CHECK(p != npos && p == buckets_[sib].parent, "merge needs sibling buckets");
    settle_for_restructure(b);
    settle_for_restructure(sib);

    // Clear any deficit on the sibling or the parent first: removing a
    // doubly-black router would leave a hole no single flag can express.
    BRT_CHECK(!buckets_[b].doubly_black, "underflowed bucket still doubly-black after push");
    if (buckets_[sib].doubly_black) doubly_black_fixup(NodeHandle::bucket(sib));
    if (internals_[p].doubly_black) doubly_black_fixup(NodeHandle::internal(p));
    BRT_CHECK(!internals_[p].doubly_black, "parent deficit must clear before merge");

    note_merge_spacing(b, sib);

    Side bs = side_of_child(p, NodeHandle::bucket(b));
    Index lb = bs == Side::left ? b : sib;
    Index rb = bs == Side::left ? sib : b;
    BRT_CHECK(buckets_[lb].next_bucket == rb, "merging non-adjacent buckets");

    bool parent_black = internals_[p].color == Color::black;
    Index gp = internals_[p].parent;

    note_merge_size(buckets_[lb].size + buckets_[rb].size);

    Bucket& L = buckets_[lb];
    Bucket& R = buckets_[rb];
    Index seam = L.tail;

    if (L.size == 0 || R.size == 0) {
        // a drained side contributes nothing; adopt the other side wholesale
        Bucket& full = L.size == 0 ? R : L;
        Bucket& hollow = L.size == 0 ? L : R;
        copies_[hollow.copy_left].refs = 0;
        copies_[hollow.copy_right].refs = 0;
        free_copy(hollow.copy_left);
        free_copy(hollow.copy_right);
        if (&full == &R) {
            L.head = R.head;
            L.tail = R.tail;
            L.size = R.size;
            L.middle = R.middle;
            L.left_count = R.left_count;
            L.right_count = R.right_count;
            L.tent_active = false;
            L.copy_left = R.copy_left;
            L.copy_right = R.copy_right;
            copies_[L.copy_left].owner = lb;
            copies_[L.copy_right].owner = lb;
        }
    } else {
        // O(1) concatenation; the seam becomes the provisional middle
        entries_[L.tail].next = R.head;
        entries_[R.head].prev = L.tail;
        counters_.entry_moves++;

        std::uint32_t lsize = L.size;
        std::uint32_t rsize = R.size;
        L.tail = R.tail;
        L.size = lsize + rsize;
        L.middle = seam;
        L.left_count = lsize;
        L.right_count = rsize;

        // four fixing-pointer copies for now; the inner two retire
        Index retiring_l = L.copy_right;
        Index retiring_r = R.copy_left;
        copies_[retiring_l].side = Side::left;
        copies_[retiring_r].side = Side::right;
        copies_[retiring_r].owner = lb;
        copies_[R.copy_right].owner = lb;
        L.copy_right = R.copy_right;
        if (copies_[retiring_l].refs == 0) {
            free_copy(retiring_l);
        } else {
            L.retiring_left = retiring_l;
            L.walk_left = seam;
        }
        if (copies_[retiring_r].refs == 0) {
            free_copy(retiring_r);
        } else {
            L.retiring_right = retiring_r;
            L.walk_right = R.head;
        }
        // the provisional middle is at most a few steps off balance
        int guard = 0;
        while (static_cast<int>(L.left_count) - static_cast<int>(L.right_count) >= 2 ||
               static_cast<int>(L.right_count) - static_cast<int>(L.left_count) >= 1) {
            rebalance_middle(lb);
            BRT_CHECK(++guard <= 12, "merge middle repair exceeded bound");
        }
    }

    // unlink rb from the bucket chain
    L.next_bucket = R.next_bucket;
    if (R.next_bucket != npos) buckets_[R.next_bucket].prev_bucket = lb;

    // the merged bucket takes the router's place in the tree
    if (gp == npos) {
        L.parent = npos;
        root_ = NodeHandle::bucket(lb);
    } else {
        replace_child(gp, NodeHandle::internal(p), NodeHandle::bucket(lb));
    }
    if (parent_black && gp != npos) set_bucket_db(lb, true);

    set_fix_target(lb, NodeHandle::bucket(lb));
    set_fix_target(rb, NodeHandle::none());
    BRT_CHECK(internals_[p].watch_head == npos, "cursors left on removed router");
    free_internal(p);
    free_bucket(rb);
    if (scan_cursor_ == rb) scan_cursor_ = lb;

    n_internal_--;
    update_height_budget();
    instr_.merges++;
    mark_restructured(lb);
    return lb;
}

// ---- background scan ----

template <typename K, typename C>
void BucketTree<K, C>::global_scan_step() {
    for (int i = 0; i < config_.scan_buckets; ++i) {
        if (scan_cursor_ == npos || !buckets_[scan_cursor_].live) scan_cursor_ = first_bucket_;
        Index c = scan_cursor_;
        for (int j = 0; j < config_.scan_fixups && !cursor_at_root(c); ++j) fixup_step(c);
        redirect_cursor_refs(c);
        if (oversized(c)) {
            push_cursor_to_root(c);
            split_bucket(c);
        } else if (buckets_[c].parent != npos && undersized(c)) {
            push_cursor_to_root(c);
            Index sib = ensure_bucket_sibling(c);
            if (sibling_rich(sib)) {
                borrow_from_sibling(c, sib);
            } else {
                c = merge_buckets(c, sib);
            }
        }
        scan_cursor_ = buckets_[c].next_bucket;
        if (scan_cursor_ == npos) scan_cursor_ = first_bucket_;
    }
}

// ---- instrumentation notes ----

template <typename K, typename C>
void BucketTree<K, C>::note_split_sizes(std::uint32_t left, std::uint32_t right) {
    int h = height_budget_;
    for (std::uint32_t sz : {left, right}) {
        int s = static_cast<int>(sz);
        if (s < h - 5 || s > h) instr_.split_size_violations++;
    }
}

template <typename K, typename C>
void BucketTree<K, C>::note_merge_size(std::uint32_t merged) {
    int s = static_cast<int>(merged);
    if (s < height_budget_ || s >= height_budget_ + 6) instr_.merge_size_violations++;
}

// A split counts toward the spacing bound when the bucket sat at or below
// the post-increase ceiling when the budget last rose and has not been
// restructured since; growing past the threshold then takes eleven inserts.
template <typename K, typename C>
void BucketTree<K, C>::note_split_spacing(Index b) {
    touch_epoch(b);
    const Bucket& bk = buckets_[b];
    if (epoch_ > 0 && last_change_increase_ && !bk.restructured_in_epoch &&
        static_cast<int>(bk.size_at_epoch) <= 2 * height_budget_ - 20) {
        instr_.qualified_splits++;
        instr_.min_inserts_before_split =
            std::min(instr_.min_inserts_before_split, bk.inserts_since);
    }
}

// Mirror bound for merges: both siblings above the post-decrease floor at
// the budget change means seven deletions are needed between them.
template <typename K, typename C>
void BucketTree<K, C>::note_merge_spacing(Index b1, Index b2) {
    touch_epoch(b1);
    touch_epoch(b2);
    const Bucket& x = buckets_[b1];
    const Bucket& y = buckets_[b2];
    if (epoch_ > 0 && !last_change_increase_ && !x.restructured_in_epoch &&
        !y.restructured_in_epoch &&
        2 * static_cast<int>(x.size_at_epoch) >= height_budget_ + 12 &&
        2 * static_cast<int>(y.size_at_epoch) >= height_budget_ + 12) {
        instr_.qualified_merges++;
        instr_.min_deletes_before_merge =
            std::min(instr_.min_deletes_before_merge, x.deletes_since + y.deletes_since);
    }
}

}  // namespace brt
