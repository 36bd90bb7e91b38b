#include "brt/bench.hpp"

#include <charconv>
#include <unordered_set>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace brt {

namespace {

// The generator's own model of live keys, so every emitted delete targets a
// key that is actually present. Duplicate inserts may still be emitted; they
// exercise the no-op path.
struct KeyModel {
    std::vector<std::int64_t> live;
    std::unordered_set<std::int64_t> present;

    void insert(std::int64_t k) {
        if (present.insert(k).second) live.push_back(k);
    }
    bool empty() const { return live.empty(); }
    std::int64_t take(Prng& rng) {
        std::size_t i = static_cast<std::size_t>(rng.below(live.size()));
        std::int64_t k = live[i];
        live[i] = live.back();
        live.pop_back();
        present.erase(k);
        return k;
    }
};

}  // namespace

std::vector<TraceOp> generate_workload(const WorkloadSpec& spec) {
    std::vector<TraceOp> ops;
    ops.reserve(spec.count);
    Prng rng(spec.seed);
    KeyModel model;
    std::uint64_t range = static_cast<std::uint64_t>(spec.key_hi - spec.key_lo) + 1;
    unsigned total_mix = spec.mix_insert + spec.mix_delete + spec.mix_query;

    auto random_key = [&] {
        return spec.key_lo + static_cast<std::int64_t>(rng.below(range));
    };

    if (spec.pattern == Pattern::uniform) {
        while (ops.size() < spec.count) {
            std::uint64_t pick = rng.below(total_mix);
            if (pick < spec.mix_insert) {
                std::int64_t k = random_key();
                ops.push_back({TraceOp::Kind::insert, k});
                model.insert(k);
            } else if (pick < spec.mix_insert + spec.mix_delete) {
                if (model.empty()) continue;
                ops.push_back({TraceOp::Kind::erase, model.take(rng)});
            } else {
                ops.push_back({TraceOp::Kind::query, random_key()});
            }
        }
    } else if (spec.pattern == Pattern::grow_shrink) {
        // alternate phases: grow the live set fourfold past an ever higher
        // peak, then shrink to a quarter; the height budget keeps crossing
        // breakpoints in both directions at growing scales
        std::size_t peak = 256;
        std::size_t target = peak;
        bool growing = true;
        while (ops.size() < spec.count) {
            std::uint64_t pick = rng.below(total_mix);
            if (pick >= spec.mix_insert + spec.mix_delete) {
                ops.push_back({TraceOp::Kind::query, random_key()});
                continue;
            }
            if (growing) {
                std::int64_t k = random_key();
                ops.push_back({TraceOp::Kind::insert, k});
                model.insert(k);
                if (model.live.size() >= target) {
                    growing = false;
                    target = std::max<std::size_t>(64, model.live.size() / 4);
                }
            } else {
                if (model.empty()) {
                    growing = true;
                    target = peak;
                    continue;
                }
                ops.push_back({TraceOp::Kind::erase, model.take(rng)});
                if (model.live.size() <= target) {
                    growing = true;
                    peak *= 2;
                    target = peak;
                }
            }
        }
    } else {  // sawtooth: ascending ramps, then ascending removals
        std::int64_t ramp = std::max<std::int64_t>(256, static_cast<std::int64_t>(spec.count) / 8);
        std::int64_t k = spec.key_lo;
        std::size_t phase = 0;  // entries appended in the current ramp
        std::size_t drain = 0;  // index of the next key to drain
        std::vector<std::int64_t> pending;
        bool filling = true;
        while (ops.size() < spec.count) {
            std::uint64_t pick = rng.below(total_mix);
            if (pick >= spec.mix_insert + spec.mix_delete) {
                ops.push_back({TraceOp::Kind::query, pending.empty()
                                                         ? k
                                                         : pending[rng.below(pending.size())]});
                continue;
            }
            if (filling) {
                ops.push_back({TraceOp::Kind::insert, k});
                pending.push_back(k);
                k++;
                if (++phase >= static_cast<std::size_t>(ramp)) {
                    filling = false;
                    phase = 0;
                }
            } else {
                if (drain >= pending.size()) {
                    pending.clear();
                    drain = 0;
                    filling = true;
                    continue;
                }
                ops.push_back({TraceOp::Kind::erase, pending[drain++]});
                if (drain >= pending.size()) {
                    pending.clear();
                    drain = 0;
                    filling = true;
                }
            }
        }
    }
    return ops;
}

std::string serialize_trace(const std::vector<TraceOp>& ops) {
    std::ostringstream os;
    for (const TraceOp& op : ops) {
        switch (op.kind) {
            case TraceOp::Kind::insert: os << "I " << op.key << '\n'; break;
            case TraceOp::Kind::erase: os << "D " << op.key << '\n'; break;
            case TraceOp::Kind::query: os << "Q " << op.key << '\n'; break;
            case TraceOp::Kind::validate: os << "V\n"; break;
        }
    }
    return os.str();
}

bool parse_trace(std::istream& in, std::vector<TraceOp>& out, ParseError& err) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) continue;
        char kind = line[0];
        if (kind == 'V') {
            if (line.size() > 1 && line.find_first_not_of(" \t", 1) != std::string::npos) {
                err = {lineno, "unexpected text after V"};
                return false;
            }
            out.push_back({TraceOp::Kind::validate, 0});
            continue;
        }
        TraceOp::Kind k;
        switch (kind) {
            case 'I': k = TraceOp::Kind::insert; break;
            case 'D': k = TraceOp::Kind::erase; break;
            case 'Q': k = TraceOp::Kind::query; break;
            default: err = {lineno, std::string("unknown op kind '") + kind + "'"}; return false;
        }
        std::size_t pos = line.find_first_not_of(" \t", 1);
        if (pos == std::string::npos) {
            err = {lineno, "missing key"};
            return false;
        }
        std::int64_t key = 0;
        auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + line.size(), key);
        if (ec != std::errc() || ptr != line.data() + line.size()) {
            err = {lineno, "bad key: " + line.substr(pos)};
            return false;
        }
        out.push_back({k, key});
    }
    return true;
}

bool parse_trace_file(const std::string& path, std::vector<TraceOp>& out, ParseError& err) {
    std::ifstream in(path);
    if (!in) {
        err = {0, "cannot open " + path};
        return false;
    }
    return parse_trace(in, out, err);
}

RunReport run_ops(const std::vector<TraceOp>& ops, const RunOptions& opt) {
    Int64Tree tree(opt.tree);
    return run_ops(ops, opt, tree);
}

RunReport run_ops(const std::vector<TraceOp>& ops, const RunOptions& opt, Int64Tree& tree) {
    RunReport rep;
    OracleSet<std::int64_t> oracle;  // shadowing assumes the tree starts empty

    // work histogram for the p99; per-op totals are small integers
    std::vector<std::uint64_t> hist(512, 0);
    std::uint64_t hist_overflow = 0;

    auto check_structure = [&](std::uint64_t op_index) {
        ValidationReport v = validate(tree);
        std::uint64_t before = rep.validation_failures;
        rep.validation_failures += v.violations.size();
        if (opt.check_terminations) {
            rep.validation_failures += check_deficit_terminations(tree).violations.size();
            rep.validation_failures += check_red_pair_terminations(tree).violations.size();
        }
        if (opt.shadow_oracle && !oracle_compare(tree, oracle)) rep.oracle_mismatches++;
        if (rep.validation_failures > before && rep.first_failure_op == 0)
            rep.first_failure_op = op_index + 1;
    };

    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const TraceOp& op = ops[i];
        WorkCounter before = tree.counters();
        switch (op.kind) {
            case TraceOp::Kind::insert: {
                auto r = tree.insert_key(op.key);
                if (opt.shadow_oracle) {
                    bool o = oracle.insert(op.key);
                    if (o != r.inserted()) rep.oracle_mismatches++;
                }
                break;
            }
            case TraceOp::Kind::erase: {
                bool r = tree.erase_key(op.key);
                if (opt.shadow_oracle) {
                    bool o = oracle.erase(op.key);
                    if (o != r) rep.oracle_mismatches++;
                }
                break;
            }
            case TraceOp::Kind::query: {
                auto r = tree.search(op.key);
                rep.max_search_comparisons = std::max(
                    rep.max_search_comparisons, static_cast<std::uint64_t>(r.comparisons));
                if (r.comparisons > 3 * tree.height_budget()) rep.search_budget_violations++;
                if (opt.shadow_oracle && oracle.contains(op.key) != r.found)
                    rep.oracle_mismatches++;
                break;
            }
            case TraceOp::Kind::validate: check_structure(i); break;
        }
        if (op.kind != TraceOp::Kind::validate) {
            std::uint64_t work = (tree.counters() - before).total();
            rep.max_work_per_op = std::max(rep.max_work_per_op, work);
            if (work < hist.size())
                hist[work]++;
            else
                hist_overflow++;
            rep.ops_total++;
        }
        if (opt.validate_mode == ValidateMode::every ||
            (opt.validate_mode == ValidateMode::periodic && opt.validate_period > 0 &&
             (i + 1) % opt.validate_period == 0)) {
            check_structure(i);
        }
    }
    auto t1 = std::chrono::steady_clock::now();
    rep.wall_time_ms =
        static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count());

    // final structural audit in every mode
    check_structure(ops.size() ? ops.size() - 1 : 0);

    if (rep.ops_total > 0) {
        std::uint64_t need = rep.ops_total - (rep.ops_total / 100);  // smallest v covering 99%
        std::uint64_t run = 0;
        for (std::size_t v = 0; v < hist.size(); ++v) {
            run += hist[v];
            if (run >= need) {
                rep.p99_work_per_op = v;
                break;
            }
        }
        if (run < need) rep.p99_work_per_op = rep.max_work_per_op;
    }
    rep.rotations_total = tree.counters().rotations;
    rep.max_push_steps = tree.instrumentation().max_push_steps;
    rep.split_size_violations = tree.instrumentation().split_size_violations;
    rep.merge_size_violations = tree.instrumentation().merge_size_violations;
    ValidationReport fin = validate(tree);
    rep.height_final = static_cast<std::uint64_t>(fin.height);
    rep.n_final = tree.internal_count();
    rep.h_final = static_cast<std::uint64_t>(tree.height_budget());
    return rep;
}

void emit_report(const RunReport& rep, std::ostream& out) {
    out << "ops_total=" << rep.ops_total << '\n';
    out << "max_work_per_op=" << rep.max_work_per_op << '\n';
    out << "p99_work_per_op=" << rep.p99_work_per_op << '\n';
    out << "rotations_total=" << rep.rotations_total << '\n';
    out << "max_push_steps=" << rep.max_push_steps << '\n';
    out << "height_final=" << rep.height_final << '\n';
    out << "n_final=" << rep.n_final << '\n';
    out << "H_final=" << rep.h_final << '\n';
    out << "validation_failures=" << rep.validation_failures << '\n';
    out << "wall_time_ms=" << rep.wall_time_ms << '\n';
}

}  // namespace brt
