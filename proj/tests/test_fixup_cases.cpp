#include "doctest.h"
#include "helpers.hpp"

// Each case of the two fix-up tables driven on a minimal hand-built tree;
// the expected output coloring and topology follow the case descriptions.

using namespace brt;
using testutil::Tree;

namespace {

Index mkb(Tree& t, std::int64_t base) { return t.raw_new_bucket(testutil::iota_keys(base, 8)); }

// Buckets whose cursor targets their parent are harmless to every
// termination-case obligation above them.
void park_cursors(Tree& t) {
    for (Index b = 0; b < t.bucket_pool().size(); ++b) {
        const auto& bk = t.bucket_pool()[b];
        if (!bk.live) continue;
        if (bk.parent != npos && bk.fix_target.is_none())
            t.raw_set_cursor(b, NodeHandle::internal(bk.parent));
    }
}

void require_clean(Tree& t) {
    std::string why;
    REQUIRE_MESSAGE(testutil::structurally_ok(t, &why), why);
}

Color color_of(const Tree& t, Index n) { return t.internal_pool()[n].color; }
bool db_of(const Tree& t, Index n) { return t.internal_pool()[n].doubly_black; }

}  // namespace

// ---- double-red table ----

TEST_CASE("double-red case 1: red uncle recolors one level") {
    Tree t;
    Index nb1 = mkb(t, 0), nb2 = mkb(t, 10), pb = mkb(t, 20), ub1 = mkb(t, 40), ub2 = mkb(t, 50);
    Index n = t.raw_new_internal(Color::red, 7, NodeHandle::bucket(nb1), NodeHandle::bucket(nb2));
    Index p = t.raw_new_internal(Color::red, 17, NodeHandle::internal(n), NodeHandle::bucket(pb));
    Index u = t.raw_new_internal(Color::red, 47, NodeHandle::bucket(ub1), NodeHandle::bucket(ub2));
    Index g = t.raw_new_internal(Color::black, 27, NodeHandle::internal(p), NodeHandle::internal(u));
    t.raw_set_root(NodeHandle::internal(g));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_cursor(nb1, NodeHandle::internal(n));
    require_clean(t);

    auto out = t.fixup_step(nb1);
    CHECK(out.kind == Tree::FixupKind::resolved);  // G is the root and stays black
    CHECK(color_of(t, p) == Color::black);
    CHECK(color_of(t, u) == Color::black);
    CHECK(color_of(t, g) == Color::black);
    CHECK(color_of(t, n) == Color::red);
    CHECK(out.steps.rotations == 0);
    CHECK(t.internal_pool()[g].left == NodeHandle::internal(p));  // topology untouched
    CHECK(t.bucket_pool()[nb1].fix_target == NodeHandle::internal(p));  // cursor advanced
    require_clean(t);
}

TEST_CASE("double-red case 1 under a red great-grandparent propagates") {
    Tree t;
    Index nb1 = mkb(t, 0), nb2 = mkb(t, 10), pb = mkb(t, 20), ub1 = mkb(t, 40), ub2 = mkb(t, 50);
    Index n = t.raw_new_internal(Color::red, 7, NodeHandle::bucket(nb1), NodeHandle::bucket(nb2));
    Index p = t.raw_new_internal(Color::red, 17, NodeHandle::internal(n), NodeHandle::bucket(pb));
    Index u = t.raw_new_internal(Color::red, 47, NodeHandle::bucket(ub1), NodeHandle::bucket(ub2));
    Index g = t.raw_new_internal(Color::black, 27, NodeHandle::internal(p), NodeHandle::internal(u));
    Index rb = mkb(t, 70);
    Index r = t.raw_new_internal(Color::red, 57, NodeHandle::internal(g), NodeHandle::bucket(rb));
    Index qb = mkb(t, 90);
    Index q = t.raw_new_internal(Color::black, 77, NodeHandle::internal(r), NodeHandle::bucket(qb));
    t.raw_set_root(NodeHandle::internal(q));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_cursor(nb1, NodeHandle::internal(n));
    require_clean(t);

    auto out = t.fixup_step(nb1);
    // G turned red below the red R: a fresh pair two levels up
    CHECK(out.kind == Tree::FixupKind::propagated_to_grandparent);
    CHECK(color_of(t, g) == Color::red);
    CHECK(color_of(t, p) == Color::black);
    CHECK(color_of(t, u) == Color::black);
    require_clean(t);
}

TEST_CASE("double-red case 1.1: doubly-black grandparent absorbs the recoloring") {
    Tree t;
    Index nb1 = mkb(t, 0), nb2 = mkb(t, 10), pb = mkb(t, 20), ub1 = mkb(t, 40), ub2 = mkb(t, 50);
    Index n = t.raw_new_internal(Color::red, 7, NodeHandle::bucket(nb1), NodeHandle::bucket(nb2));
    Index p = t.raw_new_internal(Color::red, 17, NodeHandle::internal(n), NodeHandle::bucket(pb));
    Index u = t.raw_new_internal(Color::red, 47, NodeHandle::bucket(ub1), NodeHandle::bucket(ub2));
    Index g = t.raw_new_internal(Color::black, 27, NodeHandle::internal(p), NodeHandle::internal(u),
                                 /*doubly_black=*/true);
    // sibling subtree of black height 3 balances the deficit-carrying G
    Index sa = t.raw_new_internal(Color::black, 107, NodeHandle::bucket(mkb(t, 100)),
                                  NodeHandle::bucket(mkb(t, 110)));
    Index sb = t.raw_new_internal(Color::black, 127, NodeHandle::bucket(mkb(t, 120)),
                                  NodeHandle::bucket(mkb(t, 130)));
    Index ss = t.raw_new_internal(Color::black, 117, NodeHandle::internal(sa), NodeHandle::internal(sb));
    Index root = t.raw_new_internal(Color::black, 57, NodeHandle::internal(g), NodeHandle::internal(ss));
    t.raw_set_root(NodeHandle::internal(root));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_cursor(nb1, NodeHandle::internal(n));
    require_clean(t);

    auto out = t.fixup_step(nb1);
    CHECK(out.kind == Tree::FixupKind::resolved);
    CHECK(color_of(t, p) == Color::black);
    CHECK(color_of(t, u) == Color::black);
    CHECK(color_of(t, g) == Color::black);  // stays black, deficit paid off
    CHECK_FALSE(db_of(t, g));
    CHECK(out.steps.rotations == 0);
    require_clean(t);
}

TEST_CASE("double-red case 2 falls through to case 3") {
    Tree t;
    Index pb = mkb(t, 0), nb1 = mkb(t, 10), nb2 = mkb(t, 20), ub = mkb(t, 30);
    Index n = t.raw_new_internal(Color::red, 17, NodeHandle::bucket(nb1), NodeHandle::bucket(nb2));
    Index p = t.raw_new_internal(Color::red, 7, NodeHandle::bucket(pb), NodeHandle::internal(n));
    Index g = t.raw_new_internal(Color::black, 27, NodeHandle::internal(p), NodeHandle::bucket(ub));
    t.raw_set_root(NodeHandle::internal(g));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_cursor(nb1, NodeHandle::internal(n));
    require_clean(t);

    auto out = t.fixup_step(nb1);
    CHECK(out.kind == Tree::FixupKind::resolved);
    CHECK(out.steps.rotations == 2);  // inner rotation, then the case 3 rotation
    // N rose to the top of the fragment, black, flanked by red P and G
    CHECK(t.root() == NodeHandle::internal(n));
    CHECK(color_of(t, n) == Color::black);
    CHECK(t.internal_pool()[n].left == NodeHandle::internal(p));
    CHECK(t.internal_pool()[n].right == NodeHandle::internal(g));
    CHECK(color_of(t, p) == Color::red);
    CHECK(color_of(t, g) == Color::red);
    CHECK(t.internal_pool()[p].left == NodeHandle::bucket(pb));
    CHECK(t.internal_pool()[p].right == NodeHandle::bucket(nb1));
    CHECK(t.internal_pool()[g].left == NodeHandle::bucket(nb2));
    CHECK(t.internal_pool()[g].right == NodeHandle::bucket(ub));
    // the cursor lands on the risen node's parent slot: the fragment root is
    // now the tree root, so it parks
    CHECK(t.bucket_pool()[nb1].fix_target.is_none());
    require_clean(t);
}

TEST_CASE("double-red case 3: outer child, black uncle") {
    Tree t;
    Index nb1 = mkb(t, 0), nb2 = mkb(t, 10), pb = mkb(t, 20), ub = mkb(t, 30);
    Index n = t.raw_new_internal(Color::red, 7, NodeHandle::bucket(nb1), NodeHandle::bucket(nb2));
    Index p = t.raw_new_internal(Color::red, 17, NodeHandle::internal(n), NodeHandle::bucket(pb));
    Index g = t.raw_new_internal(Color::black, 27, NodeHandle::internal(p), NodeHandle::bucket(ub));
    t.raw_set_root(NodeHandle::internal(g));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_cursor(nb1, NodeHandle::internal(n));
    require_clean(t);

    auto out = t.fixup_step(nb1);
    CHECK(out.kind == Tree::FixupKind::resolved);
    CHECK(out.steps.rotations == 1);
    CHECK(t.root() == NodeHandle::internal(p));
    CHECK(color_of(t, p) == Color::black);  // colors of P and G switched
    CHECK(color_of(t, g) == Color::red);
    CHECK(t.internal_pool()[p].left == NodeHandle::internal(n));
    CHECK(t.internal_pool()[p].right == NodeHandle::internal(g));
    CHECK(color_of(t, n) == Color::red);
    CHECK(t.internal_pool()[g].left == NodeHandle::bucket(pb));
    CHECK(t.internal_pool()[g].right == NodeHandle::bucket(ub));
    require_clean(t);
}

TEST_CASE("double-red case 3.1: doubly-black grandparent trades the pair for a deficit") {
    Tree t;
    Index nb1 = mkb(t, 0), nb2 = mkb(t, 10), pb = mkb(t, 20), ub = mkb(t, 30);
    Index n = t.raw_new_internal(Color::red, 7, NodeHandle::bucket(nb1), NodeHandle::bucket(nb2));
    Index p = t.raw_new_internal(Color::red, 17, NodeHandle::internal(n), NodeHandle::bucket(pb));
    Index g = t.raw_new_internal(Color::black, 27, NodeHandle::internal(p), NodeHandle::bucket(ub),
                                 /*doubly_black=*/true);
    Index ss = t.raw_new_internal(Color::black, 107, NodeHandle::bucket(mkb(t, 100)),
                                  NodeHandle::bucket(mkb(t, 110)));
    Index root = t.raw_new_internal(Color::black, 57, NodeHandle::internal(g), NodeHandle::internal(ss));
    t.raw_set_root(NodeHandle::internal(root));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_cursor(nb1, NodeHandle::internal(n));
    require_clean(t);

    auto out = t.fixup_step(nb1);
    CHECK(out.kind == Tree::FixupKind::resolved);
    CHECK(out.steps.rotations == 1);
    CHECK(t.internal_pool()[root].left == NodeHandle::internal(p));
    CHECK(color_of(t, p) == Color::black);
    CHECK(db_of(t, p));  // P carries the deficit now
    CHECK(color_of(t, g) == Color::red);
    CHECK_FALSE(db_of(t, g));
    CHECK(t.internal_pool()[p].left == NodeHandle::internal(n));
    CHECK(t.internal_pool()[p].right == NodeHandle::internal(g));
    CHECK(t.bucket_pool()[nb1].fix_target == NodeHandle::internal(p));
    require_clean(t);
}

// ---- doubly-black table ----

namespace {

// P black root, N a deficit bucket on the left, sibling built by the caller.
struct DbRig {
    Tree t;
    Index n = npos, p = npos;
};

}  // namespace

TEST_CASE("doubly-black case 1: red sibling rotates above the parent") {
    Tree t;
    Index n = mkb(t, 0), sb1 = mkb(t, 10), sb2 = mkb(t, 20);
    Index s = t.raw_new_internal(Color::red, 17, NodeHandle::bucket(sb1), NodeHandle::bucket(sb2));
    Index p = t.raw_new_internal(Color::black, 7, NodeHandle::bucket(n), NodeHandle::internal(s));
    t.raw_set_root(NodeHandle::internal(p));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_doubly_black(NodeHandle::bucket(n), true);
    t.raw_set_cursor(n, NodeHandle::bucket(n));
    require_clean(t);

    auto out = t.fixup_step(n);
    CHECK(out.kind == Tree::FixupKind::resolved);
    CHECK(out.steps.rotations == 1);
    CHECK(t.root() == NodeHandle::internal(s));
    CHECK(color_of(t, s) == Color::black);
    CHECK(color_of(t, p) == Color::black);  // red from case 1, then re-blackened
    CHECK(t.internal_pool()[s].left == NodeHandle::internal(p));
    CHECK(t.internal_pool()[s].right == NodeHandle::bucket(sb2));
    CHECK(t.internal_pool()[p].left == NodeHandle::bucket(n));
    CHECK(t.internal_pool()[p].right == NodeHandle::bucket(sb1));
    CHECK_FALSE(t.bucket_pool()[n].doubly_black);
    CHECK(t.bucket_pool()[n].fix_target == NodeHandle::internal(p));
    require_clean(t);
}

TEST_CASE("doubly-black case 1 with internal nephews continues as case 2") {
    Tree t;
    Index n = mkb(t, 0);
    Index x1 = t.raw_new_internal(Color::black, 17, NodeHandle::bucket(mkb(t, 10)),
                                  NodeHandle::bucket(mkb(t, 20)));
    Index x2 = t.raw_new_internal(Color::black, 47, NodeHandle::bucket(mkb(t, 40)),
                                  NodeHandle::bucket(mkb(t, 50)));
    Index s = t.raw_new_internal(Color::red, 27, NodeHandle::internal(x1), NodeHandle::internal(x2));
    Index p = t.raw_new_internal(Color::black, 7, NodeHandle::bucket(n), NodeHandle::internal(s));
    t.raw_set_root(NodeHandle::internal(p));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_doubly_black(NodeHandle::bucket(n), true);
    t.raw_set_cursor(n, NodeHandle::bucket(n));
    require_clean(t);

    auto out = t.fixup_step(n);
    CHECK(out.kind == Tree::FixupKind::resolved);
    CHECK(out.steps.rotations == 1);
    // sibling recolored red by case 2, red parent absorbed the deficit
    CHECK(t.root() == NodeHandle::internal(s));
    CHECK(color_of(t, s) == Color::black);
    CHECK(color_of(t, p) == Color::black);
    CHECK(color_of(t, x1) == Color::red);
    CHECK(color_of(t, x2) == Color::black);
    CHECK_FALSE(t.bucket_pool()[n].doubly_black);
    require_clean(t);
}

TEST_CASE("doubly-black case 1.1: red sibling under a red parent, no recoloring") {
    Tree t;
    Index n = mkb(t, 0), sb1 = mkb(t, 10), sb2 = mkb(t, 20);
    Index s = t.raw_new_internal(Color::red, 17, NodeHandle::bucket(sb1), NodeHandle::bucket(sb2));
    Index p = t.raw_new_internal(Color::red, 7, NodeHandle::bucket(n), NodeHandle::internal(s));
    Index other = t.raw_new_internal(Color::black, 107, NodeHandle::bucket(mkb(t, 100)),
                                     NodeHandle::bucket(mkb(t, 110)));
    Index root = t.raw_new_internal(Color::black, 57, NodeHandle::internal(p), NodeHandle::internal(other));
    t.raw_set_root(NodeHandle::internal(root));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_doubly_black(NodeHandle::bucket(n), true);
    t.raw_set_cursor(n, NodeHandle::bucket(n));
    require_clean(t);

    auto out = t.fixup_step(n);
    CHECK(out.kind == Tree::FixupKind::resolved);
    CHECK(out.steps.rotations == 1);
    CHECK(t.internal_pool()[root].left == NodeHandle::internal(s));
    CHECK(color_of(t, s) == Color::red);    // rotation without recoloring
    CHECK(color_of(t, p) == Color::black);  // then the leaf-sibling case absorbs at P
    CHECK(t.internal_pool()[p].left == NodeHandle::bucket(n));
    CHECK(t.internal_pool()[p].right == NodeHandle::bucket(sb1));
    CHECK_FALSE(t.bucket_pool()[n].doubly_black);
    require_clean(t);
}

TEST_CASE("doubly-black case 1.2(a): sibling deficit pools at a red parent") {
    Tree t;
    Index n = mkb(t, 0), s = mkb(t, 10);
    Index p = t.raw_new_internal(Color::red, 7, NodeHandle::bucket(n), NodeHandle::bucket(s));
    Index other = t.raw_new_internal(Color::black, 107, NodeHandle::bucket(mkb(t, 100)),
                                     NodeHandle::bucket(mkb(t, 110)));
    Index root = t.raw_new_internal(Color::black, 57, NodeHandle::internal(p), NodeHandle::internal(other));
    t.raw_set_root(NodeHandle::internal(root));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_doubly_black(NodeHandle::bucket(n), true);
    t.raw_set_doubly_black(NodeHandle::bucket(s), true);
    t.raw_set_cursor(n, NodeHandle::bucket(n));
    t.raw_set_cursor(s, NodeHandle::bucket(s));
    require_clean(t);

    auto out = t.fixup_step(n);
    CHECK(out.kind == Tree::FixupKind::resolved);
    CHECK(out.steps.rotations == 0);
    CHECK_FALSE(t.bucket_pool()[n].doubly_black);
    CHECK_FALSE(t.bucket_pool()[s].doubly_black);
    CHECK(color_of(t, p) == Color::black);
    CHECK_FALSE(db_of(t, p));
    require_clean(t);
}

TEST_CASE("doubly-black case 1.2(b): sibling deficit pools at a black parent") {
    Tree t;
    Index n = mkb(t, 0), s = mkb(t, 10);
    Index p = t.raw_new_internal(Color::black, 7, NodeHandle::bucket(n), NodeHandle::bucket(s));
    Index sa = t.raw_new_internal(Color::black, 107, NodeHandle::bucket(mkb(t, 100)),
                                  NodeHandle::bucket(mkb(t, 110)));
    Index sb = t.raw_new_internal(Color::black, 127, NodeHandle::bucket(mkb(t, 120)),
                                  NodeHandle::bucket(mkb(t, 130)));
    Index ss = t.raw_new_internal(Color::black, 117, NodeHandle::internal(sa), NodeHandle::internal(sb));
    Index root = t.raw_new_internal(Color::black, 57, NodeHandle::internal(p), NodeHandle::internal(ss));
    t.raw_set_root(NodeHandle::internal(root));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_doubly_black(NodeHandle::bucket(n), true);
    t.raw_set_doubly_black(NodeHandle::bucket(s), true);
    t.raw_set_cursor(n, NodeHandle::bucket(n));
    t.raw_set_cursor(s, NodeHandle::bucket(s));
    require_clean(t);

    auto out = t.fixup_step(n);
    CHECK(out.kind == Tree::FixupKind::propagated_to_parent);
    CHECK_FALSE(t.bucket_pool()[n].doubly_black);
    CHECK_FALSE(t.bucket_pool()[s].doubly_black);
    CHECK(db_of(t, p));
    CHECK(t.bucket_pool()[n].fix_target == NodeHandle::internal(p));
    require_clean(t);
}

TEST_CASE("doubly-black case 2: black sibling recolors red") {
    Tree t;
    Index n = mkb(t, 0);
    Index s = t.raw_new_internal(Color::black, 17, NodeHandle::bucket(mkb(t, 10)),
                                 NodeHandle::bucket(mkb(t, 20)));

    SUBCASE("(a) red parent absorbs the deficit") {
        Index p = t.raw_new_internal(Color::red, 7, NodeHandle::bucket(n), NodeHandle::internal(s));
        Index other = t.raw_new_internal(Color::black, 107, NodeHandle::bucket(mkb(t, 100)),
                                         NodeHandle::bucket(mkb(t, 110)));
        Index root =
            t.raw_new_internal(Color::black, 57, NodeHandle::internal(p), NodeHandle::internal(other));
        t.raw_set_root(NodeHandle::internal(root));
        t.raw_finalize();
        park_cursors(t);
        t.raw_set_doubly_black(NodeHandle::bucket(n), true);
        t.raw_set_cursor(n, NodeHandle::bucket(n));
        require_clean(t);

        auto out = t.fixup_step(n);
        CHECK(out.kind == Tree::FixupKind::resolved);
        CHECK(color_of(t, s) == Color::red);
        CHECK(color_of(t, p) == Color::black);
        CHECK_FALSE(t.bucket_pool()[n].doubly_black);
        require_clean(t);
    }
    SUBCASE("(b) black parent inherits the deficit") {
        Index p = t.raw_new_internal(Color::black, 7, NodeHandle::bucket(n), NodeHandle::internal(s));
        Index other = t.raw_new_internal(Color::black, 107, NodeHandle::bucket(mkb(t, 100)),
                                         NodeHandle::bucket(mkb(t, 110)));
        Index root =
            t.raw_new_internal(Color::black, 57, NodeHandle::internal(p), NodeHandle::internal(other));
        t.raw_set_root(NodeHandle::internal(root));
        t.raw_finalize();
        park_cursors(t);
        t.raw_set_doubly_black(NodeHandle::bucket(n), true);
        t.raw_set_cursor(n, NodeHandle::bucket(n));
        require_clean(t);

        auto out = t.fixup_step(n);
        CHECK(out.kind == Tree::FixupKind::propagated_to_parent);
        CHECK(color_of(t, s) == Color::red);
        CHECK(db_of(t, p));
        CHECK_FALSE(t.bucket_pool()[n].doubly_black);
        require_clean(t);
    }
    SUBCASE("(root) the root absorbs the deficit outright") {
        Index p = t.raw_new_internal(Color::black, 7, NodeHandle::bucket(n), NodeHandle::internal(s));
        t.raw_set_root(NodeHandle::internal(p));
        t.raw_finalize();
        park_cursors(t);
        t.raw_set_doubly_black(NodeHandle::bucket(n), true);
        t.raw_set_cursor(n, NodeHandle::bucket(n));
        require_clean(t);

        auto out = t.fixup_step(n);
        CHECK(out.kind == Tree::FixupKind::resolved);
        CHECK(color_of(t, s) == Color::red);
        CHECK_FALSE(db_of(t, p));
        CHECK_FALSE(t.bucket_pool()[n].doubly_black);
        require_clean(t);
    }
}

TEST_CASE("doubly-black case 3 rotates the inner red nephew then finishes as case 4") {
    Tree t;
    Index n = mkb(t, 0);
    Index sl = t.raw_new_internal(Color::red, 17, NodeHandle::bucket(mkb(t, 10)),
                                  NodeHandle::bucket(mkb(t, 20)));
    Index sb = mkb(t, 30);
    Index s = t.raw_new_internal(Color::black, 27, NodeHandle::internal(sl), NodeHandle::bucket(sb));
    Index p = t.raw_new_internal(Color::black, 7, NodeHandle::bucket(n), NodeHandle::internal(s));
    t.raw_set_root(NodeHandle::internal(p));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_doubly_black(NodeHandle::bucket(n), true);
    t.raw_set_cursor(n, NodeHandle::bucket(n));
    require_clean(t);

    auto out = t.fixup_step(n);
    CHECK(out.kind == Tree::FixupKind::resolved);
    CHECK(out.steps.rotations == 2);
    // the inner nephew rose twice and took the parent's color
    CHECK(t.root() == NodeHandle::internal(sl));
    CHECK(color_of(t, sl) == Color::black);
    CHECK(t.internal_pool()[sl].left == NodeHandle::internal(p));
    CHECK(t.internal_pool()[sl].right == NodeHandle::internal(s));
    CHECK(color_of(t, p) == Color::black);
    CHECK(color_of(t, s) == Color::black);
    CHECK(t.internal_pool()[s].right == NodeHandle::bucket(sb));
    CHECK_FALSE(t.bucket_pool()[n].doubly_black);
    require_clean(t);
}

TEST_CASE("doubly-black case 4: outer red nephew restores the missing black") {
    for (bool mirrored : {false, true}) {
        CAPTURE(mirrored);
        Tree t;
        Index n = mkb(t, mirrored ? 60 : 0);
        Index inner = mkb(t, mirrored ? 40 : 10);
        Index srb1 = mkb(t, mirrored ? 10 : 30), srb2 = mkb(t, mirrored ? 20 : 40);
        Index sr = t.raw_new_internal(Color::red, mirrored ? 17 : 37, NodeHandle::bucket(srb1),
                                      NodeHandle::bucket(srb2));
        Index s = mirrored ? t.raw_new_internal(Color::black, 27, NodeHandle::internal(sr),
                                                NodeHandle::bucket(inner))
                           : t.raw_new_internal(Color::black, 17, NodeHandle::bucket(inner),
                                                NodeHandle::internal(sr));
        Index p = mirrored ? t.raw_new_internal(Color::black, 47, NodeHandle::internal(s),
                                                NodeHandle::bucket(n))
                           : t.raw_new_internal(Color::black, 7, NodeHandle::bucket(n),
                                                NodeHandle::internal(s));
        t.raw_set_root(NodeHandle::internal(p));
        t.raw_finalize();
        park_cursors(t);
        t.raw_set_doubly_black(NodeHandle::bucket(n), true);
        t.raw_set_cursor(n, NodeHandle::bucket(n));
        require_clean(t);

        auto out = t.fixup_step(n);
        CHECK(out.kind == Tree::FixupKind::resolved);
        CHECK(out.steps.rotations == 1);
        CHECK(t.root() == NodeHandle::internal(s));
        CHECK(color_of(t, s) == Color::black);  // took P's color
        CHECK(color_of(t, p) == Color::black);
        CHECK(color_of(t, sr) == Color::black);  // outer nephew re-blackened
        CHECK_FALSE(t.bucket_pool()[n].doubly_black);
        if (!mirrored) {
            CHECK(t.internal_pool()[s].left == NodeHandle::internal(p));
            CHECK(t.internal_pool()[p].left == NodeHandle::bucket(n));
            CHECK(t.internal_pool()[p].right == NodeHandle::bucket(inner));
        } else {
            CHECK(t.internal_pool()[s].right == NodeHandle::internal(p));
            CHECK(t.internal_pool()[p].right == NodeHandle::bucket(n));
            CHECK(t.internal_pool()[p].left == NodeHandle::bucket(inner));
        }
        require_clean(t);
    }
}

// ---- dispatcher edges ----

TEST_CASE("a cursor at the root is a no-op step") {
    Tree t;
    for (std::int64_t k = 0; k < 8; ++k) t.insert_key(k);
    Index b = t.root().index;
    REQUIRE(t.bucket_pool()[b].fix_target.is_none());
    auto before = t.counters();
    auto out = t.fixup_step(b);
    CHECK(out.kind == Tree::FixupKind::no_violation);
    CHECK(t.counters().rotations == before.rotations);
    CHECK(t.counters().recolorings == before.recolorings);
    CHECK(t.push_cursor_to_root(b) == 0);
}

TEST_CASE("a clean node only advances the cursor") {
    Tree t;
    Index a = mkb(t, 0), b = mkb(t, 10), c = mkb(t, 20);
    Index x = t.raw_new_internal(Color::black, 17, NodeHandle::bucket(b), NodeHandle::bucket(c));
    Index r = t.raw_new_internal(Color::black, 7, NodeHandle::bucket(a), NodeHandle::internal(x));
    t.raw_set_root(NodeHandle::internal(r));
    t.raw_finalize();
    park_cursors(t);
    t.raw_set_cursor(b, NodeHandle::internal(x));
    require_clean(t);

    auto out = t.fixup_step(b);
    CHECK(out.kind == Tree::FixupKind::no_violation);
    CHECK(out.steps.rotations == 0);
    CHECK(out.steps.recolorings == 0);
    CHECK(t.bucket_pool()[b].fix_target.is_none());  // advanced to the root and parked
}

TEST_CASE("every dispatcher step stays within constant structural work") {
    // property over a mixed workload: per-step rotation/recoloring ceilings
    Tree t;
    brt::Prng rng(99);
    for (int i = 0; i < 30000; ++i) {
        std::int64_t k = static_cast<std::int64_t>(rng.below(2000));
        if (rng.below(3) == 0)
            t.erase_key(k);
        else
            t.insert_key(k);
    }
    CHECK(t.instrumentation().max_step_rotations <= 4);
    CHECK(t.instrumentation().max_step_recolorings <= 8);
}
