// Python bindings for the int64 instantiation of the tree, plus the
// workload runner used by the smoke tests.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "brt/bench.hpp"
#include "brt/oracle.hpp"
#include "brt/validate.hpp"

namespace py = pybind11;

namespace {

using brt::Int64Tree;

std::vector<std::int64_t> tree_keys(const Int64Tree& t) {
    std::vector<std::int64_t> out;
    out.reserve(t.size());
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

py::dict validate_dict(const Int64Tree& t) {
    auto rep = brt::validate(t);
    auto l2 = brt::check_deficit_terminations(t);
    auto l3 = brt::check_red_pair_terminations(t);
    py::list problems;
    for (const auto* r : {&rep, &l2, &l3})
        for (const auto& v : r->violations) problems.append(v.rule + ": " + v.detail);
    py::dict d;
    d["ok"] = rep.ok && l2.ok && l3.ok;
    d["violations"] = problems;
    d["ambiguities"] =
        static_cast<std::uint64_t>(l2.ambiguities.size() + l3.ambiguities.size());
    d["height"] = rep.height;
    d["internal_nodes"] = rep.internal_nodes;
    d["buckets"] = rep.buckets;
    d["min_bucket_size"] = rep.min_bucket_size;
    d["max_bucket_size"] = rep.max_bucket_size;
    d["doubly_black_nodes"] = rep.doubly_black_nodes;
    d["double_red_pairs"] = rep.double_red_pairs;
    return d;
}

py::dict counters_dict(const Int64Tree& t) {
    const auto& c = t.counters();
    py::dict d;
    d["rotations"] = c.rotations;
    d["recolorings"] = c.recolorings;
    d["fixup_steps"] = c.fixup_steps;
    d["entry_moves"] = c.entry_moves;
    d["cursor_redirects"] = c.cursor_redirects;
    d["total"] = c.total();
    return d;
}

py::dict instrumentation_dict(const Int64Tree& t) {
    const auto& i = t.instrumentation();
    py::dict d;
    d["splits"] = i.splits;
    d["merges"] = i.merges;
    d["borrows"] = i.borrows;
    d["max_push_steps"] = i.max_push_steps;
    d["split_size_violations"] = i.split_size_violations;
    d["merge_size_violations"] = i.merge_size_violations;
    d["budget_increases"] = i.budget_increases;
    d["budget_decreases"] = i.budget_decreases;
    return d;
}

py::dict report_dict(const brt::RunReport& rep) {
    py::dict d;
    d["ops_total"] = rep.ops_total;
    d["max_work_per_op"] = rep.max_work_per_op;
    d["p99_work_per_op"] = rep.p99_work_per_op;
    d["rotations_total"] = rep.rotations_total;
    d["max_push_steps"] = rep.max_push_steps;
    d["height_final"] = rep.height_final;
    d["n_final"] = rep.n_final;
    d["H_final"] = rep.h_final;
    d["validation_failures"] = rep.validation_failures;
    d["oracle_mismatches"] = rep.oracle_mismatches;
    d["wall_time_ms"] = rep.wall_time_ms;
    return d;
}

}  // namespace

PYBIND11_MODULE(brt, m) {
    m.doc() = "Ordered int64 set backed by a red-black tree with bucketed "
              "leaves and constant-time position-known updates";

    py::class_<Int64Tree>(m, "IntSet")
        .def(py::init([](int hmin, int scan_fixups) {
                 brt::TreeConfig cfg;
                 cfg.min_height_budget = hmin;
                 cfg.scan_fixups = scan_fixups;
                 return Int64Tree(cfg);
             }),
             py::arg("hmin") = 12, py::arg("scan_fixups") = 11)
        .def("insert", [](Int64Tree& t, std::int64_t k) { return t.insert_key(k).inserted(); },
             py::arg("key"), "Insert a key; returns False when it was already present.")
        .def("erase", [](Int64Tree& t, std::int64_t k) { return t.erase_key(k); }, py::arg("key"),
             "Erase a key; returns False when it was absent.")
        .def("__contains__", [](const Int64Tree& t, std::int64_t k) { return t.contains(k); })
        .def("__len__", [](const Int64Tree& t) { return t.size(); })
        .def("keys", &tree_keys, "All keys in sorted order.")
        .def("search_comparisons",
             [](const Int64Tree& t, std::int64_t k) { return t.search(k).comparisons; },
             py::arg("key"))
        .def_property_readonly("height_budget", &Int64Tree::height_budget)
        .def_property_readonly("internal_nodes", &Int64Tree::internal_count)
        .def("validate", &validate_dict, "Full structural audit, as a dict.")
        .def("counters", &counters_dict)
        .def("instrumentation", &instrumentation_dict);

    py::enum_<brt::Pattern>(m, "Pattern")
        .value("uniform", brt::Pattern::uniform)
        .value("grow_shrink", brt::Pattern::grow_shrink)
        .value("sawtooth", brt::Pattern::sawtooth);

    m.def(
        "run_workload",
        [](std::uint64_t count, std::uint64_t seed, brt::Pattern pattern, int hmin,
           int scan_fixups, bool oracle, const std::string& validate_mode) {
            brt::WorkloadSpec spec;
            spec.count = count;
            spec.seed = seed;
            spec.pattern = pattern;
            auto ops = brt::generate_workload(spec);
            brt::RunOptions opt;
            opt.tree.min_height_budget = hmin;
            opt.tree.scan_fixups = scan_fixups;
            opt.shadow_oracle = oracle;
            if (validate_mode == "every")
                opt.validate_mode = brt::ValidateMode::every;
            else if (validate_mode == "periodic")
                opt.validate_mode = brt::ValidateMode::periodic;
            return report_dict(brt::run_ops(ops, opt));
        },
        py::arg("count"), py::arg("seed") = 1, py::arg("pattern") = brt::Pattern::uniform,
        py::arg("hmin") = 12, py::arg("scan_fixups") = 11, py::arg("oracle") = false,
        py::arg("validate") = "periodic",
        "Generate a seeded workload, replay it, and return the metric report.");

    m.def("height_budget_for", [](std::uint64_t n, int hmin) {
        return Int64Tree::compute_height_budget(n, hmin);
    }, py::arg("n"), py::arg("hmin") = 12);
}
