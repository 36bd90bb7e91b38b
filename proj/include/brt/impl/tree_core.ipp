#pragma once

// Node stores, link surgery, rotations, descent and the height budget.

namespace brt {

template <typename K, typename C>
BucketTree<K, C>::BucketTree(TreeConfig cfg, C cmp) : config_(cfg), less_(cmp) {
    BRT_CHECK(config_.min_height_budget >= 9, "height budget floor too small for thresholds");
    height_budget_ = compute_height_budget(0, config_.min_height_budget);
    Index b = alloc_bucket();
    buckets_[b].copy_left = alloc_copy(b, Side::left);
    buckets_[b].copy_right = alloc_copy(b, Side::right);
    root_ = NodeHandle::bucket(b);
    first_bucket_ = b;
    scan_cursor_ = b;
}

template <typename K, typename C>
int BucketTree<K, C>::compute_height_budget(std::uint64_t n, int floor_value) {
    int raw = static_cast<int>(std::ceil(4.32 * std::log2(static_cast<double>(n + 2))));
    return std::max(raw, floor_value);
}

template <typename K, typename C>
void BucketTree<K, C>::update_height_budget() {
    int next = compute_height_budget(n_internal_, config_.min_height_budget);
    if (next != height_budget_) {
        last_change_increase_ = next > height_budget_;
        if (last_change_increase_)
            instr_.budget_increases++;
        else
            instr_.budget_decreases++;
        height_budget_ = next;
        ++epoch_;
    }
}

// ---- slot stores ----

template <typename K, typename C>
Index BucketTree<K, C>::alloc_internal() {
    Index i;
    if (internal_free_ != npos) {
        i = internal_free_;
        internal_free_ = internals_[i].free_next;
        internals_[i] = InternalNode{};
    } else {
        i = static_cast<Index>(internals_.size());
        internals_.emplace_back();
    }
    internals_[i].live = true;
    return i;
}

template <typename K, typename C>
void BucketTree<K, C>::free_internal(Index i) {
    BRT_CHECK(internals_[i].watch_head == npos, "freeing node with registered cursors");
    internals_[i].live = false;
    internals_[i].free_next = internal_free_;
    internal_free_ = i;
}

template <typename K, typename C>
Index BucketTree<K, C>::alloc_bucket() {
    Index b;
    if (bucket_free_ != npos) {
        b = bucket_free_;
        bucket_free_ = buckets_[b].free_next;
        buckets_[b] = Bucket{};
    } else {
        b = static_cast<Index>(buckets_.size());
        buckets_.emplace_back();
    }
    buckets_[b].live = true;
    buckets_[b].counter_epoch = epoch_;
    return b;
}

template <typename K, typename C>
void BucketTree<K, C>::free_bucket(Index b) {
    buckets_[b].live = false;
    buckets_[b].free_next = bucket_free_;
    bucket_free_ = b;
}

template <typename K, typename C>
Index BucketTree<K, C>::alloc_entry(const K& key) {
    Index e;
    if (entry_free_ != npos) {
        e = entry_free_;
        entry_free_ = entries_[e].free_next;
        std::uint32_t gen = entries_[e].gen;
        entries_[e] = Entry{};
        entries_[e].gen = gen;
    } else {
        e = static_cast<Index>(entries_.size());
        entries_.emplace_back();
    }
    entries_[e].key = key;
    entries_[e].live = true;
    return e;
}

template <typename K, typename C>
void BucketTree<K, C>::free_entry(Index e) {
    entries_[e].live = false;
    entries_[e].gen++;  // invalidates outstanding locators
    entries_[e].free_next = entry_free_;
    entry_free_ = e;
}

template <typename K, typename C>
Index BucketTree<K, C>::alloc_copy(Index owner, Side side) {
    Index c;
    if (copy_free_ != npos) {
        c = copy_free_;
        copy_free_ = copies_[c].free_next;
        copies_[c] = CursorCopy{};
    } else {
        c = static_cast<Index>(copies_.size());
        copies_.emplace_back();
    }
    copies_[c].owner = owner;
    copies_[c].side = side;
    copies_[c].refs = 0;
    copies_[c].live = true;
    return c;
}

template <typename K, typename C>
void BucketTree<K, C>::free_copy(Index c) {
    BRT_CHECK(copies_[c].refs == 0, "freeing referenced cursor copy");
    copies_[c].live = false;
    copies_[c].free_next = copy_free_;
    copy_free_ = c;
}

// ---- link helpers ----

template <typename K, typename C>
NodeHandle BucketTree<K, C>::child(Index node, Side s) const {
    return s == Side::left ? internals_[node].left : internals_[node].right;
}

template <typename K, typename C>
void BucketTree<K, C>::set_child(Index node, Side s, NodeHandle c) {
    (s == Side::left ? internals_[node].left : internals_[node].right) = c;
    if (c.is_internal())
        internals_[c.index].parent = node;
    else
        buckets_[c.index].parent = node;
}

template <typename K, typename C>
Side BucketTree<K, C>::side_of_child(Index parent, NodeHandle c) const {
    if (internals_[parent].left == c) return Side::left;
    BRT_CHECK(internals_[parent].right == c, "node is not a child of its parent");
    return Side::right;
}

template <typename K, typename C>
void BucketTree<K, C>::replace_child(Index parent, NodeHandle expected, NodeHandle next) {
    set_child(parent, side_of_child(parent, expected), next);
}

template <typename K, typename C>
Index BucketTree<K, C>::parent_of(NodeHandle h) const {
    return h.is_internal() ? internals_[h.index].parent : buckets_[h.index].parent;
}

template <typename K, typename C>
NodeHandle BucketTree<K, C>::sibling_of(NodeHandle h) const {
    Index p = parent_of(h);
    BRT_CHECK(p != npos, "root has no sibling");
    return internals_[p].left == h ? internals_[p].right : internals_[p].left;
}

template <typename K, typename C>
void BucketTree<K, C>::set_node_color(Index node, Color c) {
    if (internals_[node].color != c) {
        internals_[node].color = c;
        counters_.recolorings++;
    }
}

template <typename K, typename C>
void BucketTree<K, C>::set_node_db(Index node, bool flag) {
    if (internals_[node].doubly_black != flag) {
        internals_[node].doubly_black = flag;
        counters_.recolorings++;
    }
}

template <typename K, typename C>
void BucketTree<K, C>::set_bucket_db(Index bucket, bool flag) {
    if (buckets_[bucket].doubly_black != flag) {
        buckets_[bucket].doubly_black = flag;
        counters_.recolorings++;
    }
}

// ---- fixing-cursor registry ----

template <typename K, typename C>
void BucketTree<K, C>::register_watcher(Index bucket, Index node) {
    Bucket& b = buckets_[bucket];
    b.watch_prev = npos;
    b.watch_next = internals_[node].watch_head;
    if (b.watch_next != npos) buckets_[b.watch_next].watch_prev = bucket;
    internals_[node].watch_head = bucket;
}

template <typename K, typename C>
void BucketTree<K, C>::unregister_watcher(Index bucket) {
    Bucket& b = buckets_[bucket];
    if (!b.fix_target.is_internal()) return;
    Index node = b.fix_target.index;
    if (b.watch_prev != npos)
        buckets_[b.watch_prev].watch_next = b.watch_next;
    else
        internals_[node].watch_head = b.watch_next;
    if (b.watch_next != npos) buckets_[b.watch_next].watch_prev = b.watch_prev;
    b.watch_prev = b.watch_next = npos;
}

template <typename K, typename C>
void BucketTree<K, C>::set_fix_target(Index bucket, NodeHandle target) {
    if (target == root_) target = NodeHandle::none();  // parked at the root
    unregister_watcher(bucket);
    buckets_[bucket].fix_target = target;
    if (target.is_internal()) register_watcher(bucket, target.index);
}

// A rotation demotes `from_node` below `to_node`; cursors parked on the
// demoted node would otherwise leave their bucket's search path, so they
// advance to the new subtree root.
template <typename K, typename C>
void BucketTree<K, C>::move_watchers(Index from_node, Index to_node) {
    while (internals_[from_node].watch_head != npos) {
        Index wb = internals_[from_node].watch_head;
        set_fix_target(wb, NodeHandle::internal(to_node));
        counters_.cursor_redirects++;
    }
}

// ---- rotations ----

template <typename K, typename C>
NodeHandle BucketTree<K, C>::rotate_left(Index x) {
    BRT_CHECK(internals_[x].right.is_internal(), "rotate_left: right child must be internal");
    Index r = internals_[x].right.index;
    Index xp = internals_[x].parent;
    set_child(x, Side::right, internals_[r].left);
    if (xp == npos) {
        internals_[r].parent = npos;
        root_ = NodeHandle::internal(r);
    } else {
        replace_child(xp, NodeHandle::internal(x), NodeHandle::internal(r));
    }
    set_child(r, Side::left, NodeHandle::internal(x));
    move_watchers(x, r);
    counters_.rotations++;
    return NodeHandle::internal(r);
}

template <typename K, typename C>
NodeHandle BucketTree<K, C>::rotate_right(Index x) {
    BRT_CHECK(internals_[x].left.is_internal(), "rotate_right: left child must be internal");
    Index l = internals_[x].left.index;
    Index xp = internals_[x].parent;
    set_child(x, Side::left, internals_[l].right);
    if (xp == npos) {
        internals_[l].parent = npos;
        root_ = NodeHandle::internal(l);
    } else {
        replace_child(xp, NodeHandle::internal(x), NodeHandle::internal(l));
    }
    set_child(l, Side::right, NodeHandle::internal(x));
    move_watchers(x, l);
    counters_.rotations++;
    return NodeHandle::internal(l);
}

// ---- descent ----

template <typename K, typename C>
typename BucketTree<K, C>::Descend BucketTree<K, C>::search_descend(const K& key) const {
    NodeHandle cur = root_;
    int depth = 0;
    while (cur.is_internal()) {
        const InternalNode& v = internals_[cur.index];
        cur = less_(v.separator, key) ? v.right : v.left;  // key <= separator goes left
        ++depth;
    }
    return {cur.index, depth};
}

template <typename K, typename C>
typename BucketTree<K, C>::BucketProbe BucketTree<K, C>::bucket_search(Index bucket,
                                                                       const K& key) const {
    BucketProbe out;
    Index e = buckets_[bucket].head;
    while (e != npos) {
        out.comparisons++;
        if (!less_(entries_[e].key, key)) break;
        e = entries_[e].next;
    }
    out.before = e;
    if (e != npos && !less_(key, entries_[e].key)) {
        out.found = true;
        out.entry = e;
    }
    return out;
}

template <typename K, typename C>
typename BucketTree<K, C>::SearchResult BucketTree<K, C>::search(const K& key) const {
    Descend d = search_descend(key);
    BucketProbe p = bucket_search(d.bucket, key);
    SearchResult out;
    out.found = p.found;
    out.bucket = d.bucket;
    out.before = p.before;
    out.comparisons = d.path_length + p.comparisons;
    out.path_length = d.path_length;
    if (p.found) out.loc = locator(p.entry);
    return out;
}

template <typename K, typename C>
int BucketTree<K, C>::black_height(NodeHandle h) const {
    if (h.is_bucket()) return 1;
    const InternalNode& v = internals_[h.index];
    int self = (v.color == Color::black ? 1 : 0) + (v.doubly_black ? 1 : 0);
    return self + std::max(black_height(v.left), black_height(v.right));
}

// ---- entry navigation ----

template <typename K, typename C>
bool BucketTree<K, C>::locator_live(EntryLocator loc) const {
    return loc.entry != npos && loc.entry < entries_.size() && entries_[loc.entry].live &&
           entries_[loc.entry].gen == loc.gen;
}

template <typename K, typename C>
const K& BucketTree<K, C>::key_of(EntryLocator loc) const {
    BRT_CHECK(locator_live(loc), "stale entry locator");
    return entries_[loc.entry].key;
}

template <typename K, typename C>
EntryLocator BucketTree<K, C>::first() const {
    Index b = first_bucket_;
    while (b != npos && buckets_[b].size == 0) b = buckets_[b].next_bucket;
    return b == npos ? EntryLocator{} : locator(buckets_[b].head);
}

template <typename K, typename C>
EntryLocator BucketTree<K, C>::last() const {
    Index b = first_bucket_;
    Index lastb = npos;
    while (b != npos) {
        if (buckets_[b].size != 0) lastb = b;
        b = buckets_[b].next_bucket;
    }
    return lastb == npos ? EntryLocator{} : locator(buckets_[lastb].tail);
}

template <typename K, typename C>
EntryLocator BucketTree<K, C>::next(EntryLocator loc) const {
    BRT_CHECK(locator_live(loc), "stale entry locator");
    const Entry& e = entries_[loc.entry];
    if (e.next != npos) return locator(e.next);
    Index b = buckets_[owner_bucket(loc.entry)].next_bucket;
    while (b != npos && buckets_[b].size == 0) b = buckets_[b].next_bucket;
    return b == npos ? EntryLocator{} : locator(buckets_[b].head);
}

template <typename K, typename C>
EntryLocator BucketTree<K, C>::prev(EntryLocator loc) const {
    BRT_CHECK(locator_live(loc), "stale entry locator");
    const Entry& e = entries_[loc.entry];
    if (e.prev != npos) return locator(e.prev);
    Index b = buckets_[owner_bucket(loc.entry)].prev_bucket;
    while (b != npos && buckets_[b].size == 0) b = buckets_[b].prev_bucket;
    return b == npos ? EntryLocator{} : locator(buckets_[b].tail);
}

// ---- raw construction for hand-built trees ----

template <typename K, typename C>
Index BucketTree<K, C>::raw_new_bucket(const std::vector<K>& keys) {
    Index b = alloc_bucket();
    Bucket& bk = buckets_[b];
    bk.copy_left = alloc_copy(b, Side::left);
    bk.copy_right = alloc_copy(b, Side::right);
    Index prev = npos;
    for (const K& k : keys) {
        Index e = alloc_entry(k);
        entries_[e].prev = prev;
        if (prev == npos)
            bk.head = e;
        else
            entries_[prev].next = e;
        prev = e;
        bk.size++;
    }
    bk.tail = prev;
    // balanced middle: first ceil(n/2) entries on the left
    bk.left_count = (bk.size + 1) / 2;
    bk.right_count = bk.size - bk.left_count;
    Index e = bk.head;
    for (std::uint32_t i = 0; i < bk.size; ++i) {
        bool left = i < bk.left_count;
        if (left && i + 1 == bk.left_count) bk.middle = e;
        entries_[e].copy = left ? bk.copy_left : bk.copy_right;
        copies_[left ? bk.copy_left : bk.copy_right].refs++;
        e = entries_[e].next;
    }
    n_entries_ += bk.size;
    return b;
}

template <typename K, typename C>
Index BucketTree<K, C>::raw_new_internal(Color c, const K& sep, NodeHandle l, NodeHandle r,
                                         bool doubly_black) {
    Index i = alloc_internal();
    internals_[i].separator = sep;
    internals_[i].color = c;
    internals_[i].doubly_black = doubly_black;
    set_child(i, Side::left, l);
    set_child(i, Side::right, r);
    n_internal_++;
    return i;
}

template <typename K, typename C>
void BucketTree<K, C>::raw_set_root(NodeHandle h) {
    // drop the constructor's placeholder bucket if it is still the root
    if (root_.is_bucket() && root_ != h && buckets_[root_.index].size == 0 &&
        buckets_[root_.index].parent == npos) {
        Bucket& old = buckets_[root_.index];
        copies_[old.copy_left].refs = 0;
        copies_[old.copy_right].refs = 0;
        free_copy(old.copy_left);
        free_copy(old.copy_right);
        free_bucket(root_.index);
    }
    root_ = h;
    if (h.is_internal())
        internals_[h.index].parent = npos;
    else
        buckets_[h.index].parent = npos;
}

template <typename K, typename C>
void BucketTree<K, C>::raw_set_cursor(Index bucket, NodeHandle target) {
    set_fix_target(bucket, target);
}

template <typename K, typename C>
void BucketTree<K, C>::raw_set_doubly_black(NodeHandle h, bool flag) {
    if (h.is_internal())
        internals_[h.index].doubly_black = flag;
    else
        buckets_[h.index].doubly_black = flag;
}

template <typename K, typename C>
void BucketTree<K, C>::raw_finalize() {
    // chain buckets in symmetric order and recompute derived header state
    std::vector<Index> order;
    std::vector<NodeHandle> stack{root_};
    while (!stack.empty()) {
        NodeHandle h = stack.back();
        stack.pop_back();
        if (h.is_bucket()) {
            order.push_back(h.index);
        } else {
            stack.push_back(internals_[h.index].left);
            stack.push_back(internals_[h.index].right);
        }
    }
    std::reverse(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) {
        buckets_[order[i]].prev_bucket = i == 0 ? npos : order[i - 1];
        buckets_[order[i]].next_bucket = i + 1 == order.size() ? npos : order[i + 1];
    }
    first_bucket_ = order.front();
    scan_cursor_ = first_bucket_;
    update_height_budget();
}

}  // namespace brt
