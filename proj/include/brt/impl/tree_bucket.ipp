#pragma once

// Bucket interiors: sorted entry lists, first/middle/last markers, the
// dual fixing-pointer copies and their incremental consolidation.

namespace brt {

template <typename K, typename C>
void BucketTree<K, C>::set_entry_copy(Index entry, Index copy) {
    Index old = entries_[entry].copy;
    if (old == copy) return;
    if (old != npos) {
        copies_[old].refs--;
        // a retiring copy that lost its last reference is discarded
        if (copies_[old].refs == 0) {
            Index owner = copies_[old].owner;
            Bucket& b = buckets_[owner];
            if (b.retiring_left == old) {
                b.retiring_left = npos;
                b.walk_left = npos;
                free_copy(old);
            } else if (b.retiring_right == old) {
                b.retiring_right = npos;
                b.walk_right = npos;
                free_copy(old);
            }
        }
    }
    entries_[entry].copy = copy;
    if (copy != npos) copies_[copy].refs++;
    counters_.cursor_redirects++;
}

template <typename K, typename C>
void BucketTree<K, C>::link_entry(Index bucket, Index before, Index entry) {
    Bucket& b = buckets_[bucket];
    Entry& e = entries_[entry];
    if (before == npos) {  // append
        e.prev = b.tail;
        e.next = npos;
        if (b.tail != npos)
            entries_[b.tail].next = entry;
        else
            b.head = entry;
        b.tail = entry;
    } else {
        Entry& nx = entries_[before];
        e.prev = nx.prev;
        e.next = before;
        if (nx.prev != npos)
            entries_[nx.prev].next = entry;
        else
            b.head = entry;
        nx.prev = entry;
    }
    b.size++;
    counters_.entry_moves++;
}

template <typename K, typename C>
void BucketTree<K, C>::unlink_entry(Index bucket, Index entry) {
    Bucket& b = buckets_[bucket];
    Entry& e = entries_[entry];
    if (e.prev != npos)
        entries_[e.prev].next = e.next;
    else
        b.head = e.next;
    if (e.next != npos)
        entries_[e.next].prev = e.prev;
    else
        b.tail = e.prev;
    b.size--;
    counters_.entry_moves++;
}

// One balancing move of the middle marker; the entry crossing sides is
// re-referenced to the matching live copy. The left side keeps the odd
// entry, so a full bucket splits into ceil/floor halves.
template <typename K, typename C>
void BucketTree<K, C>::rebalance_middle(Index bucket) {
    Bucket& b = buckets_[bucket];
    if (b.tent_active || b.size == 0) return;
    if (b.left_count >= b.right_count + 2) {
        Index moved = b.middle;
        b.middle = entries_[moved].prev;
        BRT_CHECK(b.middle != npos, "middle moved off the head");
        b.left_count--;
        b.right_count++;
        set_entry_copy(moved, b.copy_right);
    } else if (b.right_count >= b.left_count + 1) {
        Index moved = entries_[b.middle].next;
        BRT_CHECK(moved != npos, "middle moved off the tail");
        b.middle = moved;
        b.left_count++;
        b.right_count--;
        set_entry_copy(moved, b.copy_left);
    }
}

template <typename K, typename C>
Index BucketTree<K, C>::bucket_insert_entry(Index bucket, Index before, const K& key) {
    Bucket& b = buckets_[bucket];
    Index e = alloc_entry(key);
    link_entry(bucket, before, e);
    if (b.size == 1) {  // first entry
        if (b.tent_active) {
            b.tent = npos;
            b.tent_left = 0;
            b.tent_right = 1;
            entries_[e].copy = b.copy_right;
            copies_[b.copy_right].refs++;
        } else {
            b.middle = e;
            b.left_count = 1;
            b.right_count = 0;
            entries_[e].copy = b.copy_left;
            copies_[b.copy_left].refs++;
        }
        return e;
    }
    if (b.tent_active) {
        // swept region = positions at or before the tentative marker
        bool swept = before != npos && copies_[entries_[before].copy].side == Side::left;
        if (swept) {
            b.tent_left++;
            entries_[e].copy = b.copy_left;
        } else {
            b.tent_right++;
            entries_[e].copy = b.copy_right;
        }
        copies_[entries_[e].copy].refs++;
    } else {
        Side s = before == npos ? Side::right : copies_[entries_[before].copy].side;
        if (s == Side::left) {
            b.left_count++;
            entries_[e].copy = b.copy_left;
        } else {
            b.right_count++;
            entries_[e].copy = b.copy_right;
        }
        copies_[entries_[e].copy].refs++;
        rebalance_middle(bucket);
    }
    return e;
}

// Removes the entry from the bucket's bookkeeping but keeps its slot alive
// (borrows move the entry to the sibling under the same locator).
template <typename K, typename C>
void BucketTree<K, C>::detach_entry(Index bucket, Index entry) {
    Bucket& b = buckets_[bucket];
    Index cp = entries_[entry].copy;
    Side s = copies_[cp].side;

    if (b.walk_left == entry) b.walk_left = entries_[entry].prev;
    if (b.walk_right == entry) b.walk_right = entries_[entry].next;

    if (b.tent_active) {
        if (b.tent == entry) b.tent = entries_[entry].prev;
        if (s == Side::left)
            b.tent_left--;
        else
            b.tent_right--;
        unlink_entry(bucket, entry);
    } else {
        if (entry == b.middle) {
            if (entries_[entry].prev != npos) {
                b.middle = entries_[entry].prev;
                b.left_count--;
            } else if (entries_[entry].next != npos) {
                Index promoted = entries_[entry].next;
                b.middle = promoted;
                b.right_count--;  // promoted entry flips to the left side
                unlink_entry(bucket, entry);
                set_entry_copy(entry, npos);
                set_entry_copy(promoted, b.copy_left);
                rebalance_middle(bucket);
                return;
            } else {
                b.middle = npos;
                b.left_count = 0;
                b.right_count = 0;
                unlink_entry(bucket, entry);
                set_entry_copy(entry, npos);
                return;
            }
        } else if (s == Side::left) {
            b.left_count--;
        } else {
            b.right_count--;
        }
        unlink_entry(bucket, entry);
        set_entry_copy(entry, npos);
        rebalance_middle(bucket);
        return;
    }
    set_entry_copy(entry, npos);
}

template <typename K, typename C>
K BucketTree<K, C>::bucket_remove_entry(Index bucket, Index entry) {
    K key = entries_[entry].key;
    detach_entry(bucket, entry);
    free_entry(entry);
    return key;
}

// Append or prepend a detached entry (borrow traffic between siblings).
template <typename K, typename C>
void BucketTree<K, C>::attach_entry_edge(Index bucket, Index entry, Side edge) {
    Bucket& b = buckets_[bucket];
    link_entry(bucket, edge == Side::right ? npos : b.head, entry);
    if (b.size == 1) {
        if (b.tent_active) {
            b.tent = npos;
            b.tent_left = 0;
            b.tent_right = 1;
            set_entry_copy(entry, b.copy_right);
        } else {
            b.middle = entry;
            b.left_count = 1;
            b.right_count = 0;
            set_entry_copy(entry, b.copy_left);
        }
        return;
    }
    if (b.tent_active) {
        // at the tail: unswept; at the head: swept only if the sweep passed the old head
        bool swept = edge == Side::left && b.tent != npos;
        if (swept) {
            b.tent_left++;
            set_entry_copy(entry, b.copy_left);
        } else {
            b.tent_right++;
            set_entry_copy(entry, b.copy_right);
        }
    } else {
        if (edge == Side::left) {
            b.left_count++;
            set_entry_copy(entry, b.copy_left);
        } else {
            b.right_count++;
            set_entry_copy(entry, b.copy_right);
        }
        rebalance_middle(bucket);
    }
}

// One step of the post-split repair sweep: the next entry is re-referenced
// to the fresh left copy and the marker advances; once the side counts
// balance, the tentative marker is promoted to the real middle.
template <typename K, typename C>
bool BucketTree<K, C>::advance_tent(Index bucket) {
    Bucket& b = buckets_[bucket];
    if (!b.tent_active) return false;
    Index nxt = b.tent == npos ? b.head : entries_[b.tent].next;
    if (nxt != npos) {
        set_entry_copy(nxt, b.copy_left);
        b.tent = nxt;
        b.tent_left++;
        b.tent_right--;
    }
    // The side-count difference moves by +1 or +3 per update, so it always
    // lands in [-1, 1] before the sweep runs off the tail.
    int diff = static_cast<int>(b.tent_left) - static_cast<int>(b.tent_right);
    if (diff <= 1 && diff >= -1 && (b.tent != npos || b.size == 0)) {
        b.tent_active = false;
        b.middle = b.tent;
        b.left_count = b.tent_left;
        b.right_count = b.tent_right;
        b.tent = npos;
        b.tent_left = b.tent_right = 0;
        rebalance_middle(bucket);
    }
    return true;
}

// One consolidation step for a retiring copy: advance the walker, moving a
// reference to the surviving copy when it still points at the retiring one.
template <typename K, typename C>
bool BucketTree<K, C>::consolidate_step(Index bucket, Side side) {
    Bucket& b = buckets_[bucket];
    Index retiring = side == Side::left ? b.retiring_left : b.retiring_right;
    if (retiring == npos) return false;
    Index& walk = side == Side::left ? b.walk_left : b.walk_right;
    if (walk == npos) {
        BRT_CHECK(copies_[retiring].refs == 0, "consolidation walker exhausted early");
        (side == Side::left ? b.retiring_left : b.retiring_right) = npos;
        free_copy(retiring);
        return false;
    }
    Index cur = walk;
    walk = side == Side::left ? entries_[cur].prev : entries_[cur].next;
    if (entries_[cur].copy == retiring) {
        set_entry_copy(cur, side == Side::left ? b.copy_left : b.copy_right);
        // set_entry_copy may already have freed the retiring copy
    }
    return true;
}

// Called once per update landing in the bucket: advances the post-split
// sweep one step and retires merge leftovers two references per side.
template <typename K, typename C>
void BucketTree<K, C>::redirect_cursor_refs(Index bucket) {
    advance_tent(bucket);
    for (Side s : {Side::left, Side::right}) {
        for (int i = 0; i < 2; ++i) {
            if (!consolidate_step(bucket, s)) break;
        }
    }
}

// Finishes any in-flight marker repair or copy consolidation before a split
// or merge. The remaining debt is bounded by a constant: the update cadence
// keeps both repairs within a few steps of done whenever a bucket can reach
// a restructuring threshold again.
template <typename K, typename C>
void BucketTree<K, C>::settle_for_restructure(Index bucket) {
    Bucket& b = buckets_[bucket];
    std::uint32_t steps = 0;
    while (b.tent_active) {
        advance_tent(bucket);
        BRT_CHECK(++steps <= 160, "marker repair burst exceeded bound");
    }
    while (b.retiring_left != npos || b.retiring_right != npos) {
        if (b.retiring_left != npos) consolidate_step(bucket, Side::left);
        if (b.retiring_right != npos) consolidate_step(bucket, Side::right);
        BRT_CHECK(++steps <= 160, "consolidation burst exceeded bound");
    }
    instr_.max_settle_steps = std::max(instr_.max_settle_steps, steps);
}

template <typename K, typename C>
void BucketTree<K, C>::touch_epoch(Index bucket) {
    Bucket& b = buckets_[bucket];
    if (b.counter_epoch != epoch_) {
        b.counter_epoch = epoch_;
        b.inserts_since = 0;
        b.deletes_since = 0;
        b.size_at_epoch = b.size;
        b.restructured_in_epoch = false;
    }
}

template <typename K, typename C>
void BucketTree<K, C>::mark_restructured(Index bucket) {
    touch_epoch(bucket);
    Bucket& b = buckets_[bucket];
    b.restructured_in_epoch = true;
    b.inserts_since = 0;
    b.deletes_since = 0;
}

}  // namespace brt
