#pragma once

#include <algorithm>
#include <vector>

#include "brt/tree.hpp"

// Brute-force sorted-vector set used as the differential-testing reference.
// Deliberately naive: correctness comes from std::vector and binary search,
// nothing shared with the tree implementation.

namespace brt {

template <typename Key, typename Compare = std::less<Key>>
struct OracleSet {
    std::vector<Key> keys;
    Compare less{};

    bool insert(const Key& k) {
        auto it = std::lower_bound(keys.begin(), keys.end(), k, less);
        if (it != keys.end() && !less(k, *it)) return false;
        keys.insert(it, k);
        return true;
    }
    bool erase(const Key& k) {
        auto it = std::lower_bound(keys.begin(), keys.end(), k, less);
        if (it == keys.end() || less(k, *it)) return false;
        keys.erase(it);
        return true;
    }
    bool contains(const Key& k) const {
        auto it = std::lower_bound(keys.begin(), keys.end(), k, less);
        return it != keys.end() && !less(k, *it);
    }
    std::size_t size() const { return keys.size(); }
};

// Compares full sorted contents of the tree and the oracle.
template <typename Key, typename Compare>
bool oracle_compare(const BucketTree<Key, Compare>& t, const OracleSet<Key, Compare>& o) {
    if (t.size() != o.size()) return false;
    std::size_t i = 0;
    Index b = t.first_bucket();
    const auto& buckets = t.bucket_pool();
    const auto& entries = t.entry_pool();
    while (b != npos) {
        Index e = buckets[b].head;
        while (e != npos) {
            if (i >= o.keys.size()) return false;
            const Key& k = entries[e].key;
            if (t.key_comp()(k, o.keys[i]) || t.key_comp()(o.keys[i], k)) return false;
            i++;
            e = entries[e].next;
        }
        b = buckets[b].next_bucket;
    }
    return i == o.keys.size();
}

}  // namespace brt
