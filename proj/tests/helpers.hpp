#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "brt/bench.hpp"
#include "brt/tree.hpp"
#include "brt/validate.hpp"

namespace testutil {

using Tree = brt::BucketTree<std::int64_t>;

inline std::vector<std::int64_t> collect(const Tree& t) {
    std::vector<std::int64_t> out;
    brt::Index b = t.first_bucket();
    while (b != brt::npos) {
        brt::Index e = t.bucket_pool()[b].head;
        while (e != brt::npos) {
            out.push_back(t.entry_pool()[e].key);
            e = t.entry_pool()[e].next;
        }
        b = t.bucket_pool()[b].next_bucket;
    }
    return out;
}

inline std::vector<std::int64_t> iota_keys(std::int64_t lo, std::size_t n, std::int64_t step = 1) {
    std::vector<std::int64_t> out(n);
    std::int64_t v = lo;
    for (auto& x : out) {
        x = v;
        v += step;
    }
    return out;
}

inline std::string explain(const brt::ValidationReport& rep) {
    std::string out;
    for (const auto& v : rep.violations) {
        out += v.rule;
        out += ": ";
        out += v.detail;
        out += "; ";
    }
    return out;
}

inline bool structurally_ok(const Tree& t, std::string* why = nullptr) {
    auto rep = brt::validate(t);
    auto l2 = brt::check_deficit_terminations(t);
    auto l3 = brt::check_red_pair_terminations(t);
    bool ok = rep.ok && l2.ok && l3.ok;
    if (!ok && why) *why = explain(rep) + explain(l2) + explain(l3);
    return ok;
}

}  // namespace testutil
