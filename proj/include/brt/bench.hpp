#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "brt/oracle.hpp"
#include "brt/tree.hpp"
#include "brt/validate.hpp"

// Trace format, deterministic workload generation and the replay runner
// behind the command-line harness. Keys are fixed at signed 64-bit integers
// here so traces are bit-exact across platforms; the tree itself stays
// generic.

namespace brt {

using Int64Tree = BucketTree<std::int64_t>;

// Deterministic 64-bit generator (splitmix64); identical sequences on every
// platform for a given seed.
struct Prng {
    std::uint64_t state;
    explicit Prng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0, bound)
    std::uint64_t below(std::uint64_t bound) { return bound ? next() % bound : 0; }
};

struct TraceOp {
    enum class Kind : std::uint8_t { insert, erase, query, validate };
    Kind kind = Kind::insert;
    std::int64_t key = 0;
};

enum class Pattern { uniform, grow_shrink, sawtooth };

struct WorkloadSpec {
    std::uint64_t seed = 1;
    std::uint64_t count = 0;
    // relative weights of insert : delete : query
    unsigned mix_insert = 2, mix_delete = 1, mix_query = 1;
    std::int64_t key_lo = 0, key_hi = 1'000'000;
    Pattern pattern = Pattern::uniform;
};

std::vector<TraceOp> generate_workload(const WorkloadSpec& spec);
std::string serialize_trace(const std::vector<TraceOp>& ops);

struct ParseError {
    std::size_t line = 0;
    std::string message;
};

// Returns true on success; on failure fills `err` with the first bad line.
bool parse_trace(std::istream& in, std::vector<TraceOp>& out, ParseError& err);
bool parse_trace_file(const std::string& path, std::vector<TraceOp>& out, ParseError& err);

enum class ValidateMode : std::uint8_t { none, every, periodic };

struct RunOptions {
    TreeConfig tree{};
    ValidateMode validate_mode = ValidateMode::none;
    std::uint64_t validate_period = 1000;  // for ValidateMode::periodic
    bool shadow_oracle = false;
    bool check_terminations = true;  // within validation passes
};

struct RunReport {
    std::uint64_t ops_total = 0;
    std::uint64_t max_work_per_op = 0;
    std::uint64_t p99_work_per_op = 0;
    std::uint64_t rotations_total = 0;
    std::uint64_t max_push_steps = 0;
    std::uint64_t height_final = 0;
    std::uint64_t n_final = 0;
    std::uint64_t h_final = 0;
    std::uint64_t validation_failures = 0;
    std::uint64_t wall_time_ms = 0;
    // auxiliary diagnostics (not part of the stable metric block)
    std::uint64_t oracle_mismatches = 0;
    std::uint64_t split_size_violations = 0;
    std::uint64_t merge_size_violations = 0;
    std::uint64_t max_search_comparisons = 0;
    std::uint64_t search_budget_violations = 0;  // queries costing more than 3H
    std::uint64_t first_failure_op = 0;
};

RunReport run_ops(const std::vector<TraceOp>& ops, const RunOptions& opt);
RunReport run_ops(const std::vector<TraceOp>& ops, const RunOptions& opt, Int64Tree& tree);

// `metric=value` lines, one per metric, stable order.
void emit_report(const RunReport& rep, std::ostream& out);

}  // namespace brt
