#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "jreal/nested.hpp"
#include "jreal/parser.hpp"
#include "support.hpp"

using namespace jreal;
using namespace jreal::testing;

namespace {
Fm F(const char* s) { return parse_formula(s); }
LItem I(const char* s) { return in(F(s)); }
RItem O(const char* s) { return out(F(s)); }

int find_bracket(const Lhs& l, const Fm& member) {
    for (size_t i = 0; i < l.size(); ++i)
        if (l[i].is_bracket())
            for (auto& m : l[i].body)
                if (!m.is_bracket() && equal(m.f, member)) return static_cast<int>(i);
    return -1;
}
}  // namespace

TEST_CASE("fm: base clauses") {
    CHECK(equal(fm(seq({I("p")}, O("q"))), F("p -> q")));
    CHECK(equal(fm(seq({}, O("q"))), F("q")));
    CHECK(equal(fm_lhs({}), F("# -> #")));
    CHECK(equal(fm_lhs({I("p"), I("q")}), F("p & q")));
}

TEST_CASE("fm: annotated brackets") {
    Sequent s = seq({dia_br({I("p")}, 3)}, box_br(seq({}, O("q")), 0));
    CHECK(compare(fm(s), F("<3>p -> [0]q")) == 0);
    CHECK(ann(s) == std::set<int>{0, 3});
    CHECK(compare(fm(seq({dia_br({}, 3)}, O("q"))), F("<3>(# -> #) -> q")) == 0);
}

TEST_CASE("fm: worked example endsequent") {
    Fm a = F("(([1]# -> #) -> #) -> [0]#");
    CHECK(compare(fm(seq({}, out(a))), a) == 0);
    CHECK(compare(fm(seq({in(a->l)}, box_br(seq({}, O("#")), 0))), a) == 0);
}

TEST_CASE("depth of positions") {
    Sequent s = seq({I("p")}, box_br(seq({dia_br({I("q")})}, O("r"))));
    CHECK(depth(Position{{}, {0}}) == 0);
    CHECK(depth(Position{{1}, {0}}) == 1);
    CHECK(depth(Position{{1, 0}, {0}}) == 2);
    CHECK(spine_length(s, {1, 0}) == 1);
    CHECK(spine_length(s, {1}) == 1);
    CHECK(spine_length(s, {}) == 0);
}

TEST_CASE("prune: example with two diamond brackets") {
    // p*, [ <q*>, <r*, {}>, s o ]   ->   p*, [ <q*>, [ r*, {} ] ]
    Sequent s = seq({I("p")}, box_br(seq({dia_br({I("q")}), dia_br({I("r")})}, O("s"))));
    int j = find_bracket(s.rhs.body->lhs, F("r"));
    REQUIRE(j >= 0);
    Pruned pr = prune_fill(s, {1, j}, O("t"), nullptr);
    Sequent want = seq({I("p")}, box_br(seq({dia_br({I("q")})}, box_br(seq({I("r")}, O("t"))))));
    CHECK(pr.seq == normalize(want));
    CHECK(pr.reindex.empty());
}

TEST_CASE("prune: hole beside the output at depth 0") {
    Sequent s = seq({I("p")}, O("a"));
    Pruned pr = prune_fill(s, {}, O("b"), nullptr);
    CHECK(pr.seq == seq({I("p")}, O("b")));
}

TEST_CASE("prune: annotated flips get fresh indices") {
    // <p*, {}>_3, [q*, c o]_0   ->   <q*>_(4m+3), [p*, a o]_(4l)
    Sequent s = seq({dia_br({I("p")}, 3)}, box_br(seq({I("q")}, O("c")), 0));
    Counter c;
    c.reserve_all(ann(s));
    Pruned pr = prune_fill(s, {0}, O("a"), &c);
    REQUIRE(pr.seq.lhs.size() == 1);
    const LItem& dia = pr.seq.lhs[0];
    REQUIRE(dia.is_bracket());
    REQUIRE(pr.seq.rhs.is_bracket());
    CHECK(dia.idx % 4 == 3);
    CHECK(pr.seq.rhs.idx % 4 == 0);
    for (int i : {dia.idx, pr.seq.rhs.idx}) CHECK_FALSE(ann(s).count(i));
    CHECK(pr.reindex.size() == 2);
    CHECK(pr.reindex.at(3) == pr.seq.rhs.idx);
    CHECK(pr.reindex.at(0) == dia.idx);
    CHECK(erase(pr.seq) == normalize(seq({dia_br({I("q")})}, box_br(seq({I("p")}, O("a"))))));
}

TEST_CASE("fill") {
    Sequent s = seq({I("p")}, O("q"));
    Sequent g = seq({I("r")}, O("s"));
    Sequent f = fill_output(s, {}, g);
    CHECK(f == normalize(seq({I("p"), I("r")}, O("s"))));

    Sequent boxed = seq({I("p")}, box_br(seq({}, O("z"))));
    CHECK(fill_output(boxed, {1}, seq({I("p")}, O("q"))) == normalize(seq({I("p")}, box_br(seq({I("p")}, O("q"))))));

    CHECK_THROWS_AS(fill_output(seq({dia_br({I("p")})}, O("q")), {0}, g), PositionError);
}

TEST_CASE("fill then extract round trips") {
    Rng g(21);
    for (int i = 0; i < 100; ++i) {
        int mods = 0;
        Fm a = random_formula(g, 3, mods, 2), b = random_formula(g, 3, mods, 2);
        Sequent s = seq({in(a), dia_br({in(b)})}, box_br(seq({in(b)}, out(a))));
        s = normalize(s);
        for (std::vector<int> path : {std::vector<int>{}, std::vector<int>{static_cast<int>(s.lhs.size())}}) {
            Lhs payload = {in(b), in(a)};
            Sequent f = fill_input(s, path, payload);
            Lhs before = extract_lhs(s, path);
            Lhs after = extract_lhs(f, path);
            Lhs expect = before;
            expect.insert(expect.end(), payload.begin(), payload.end());
            normalize(expect);
            CHECK(compare(after, expect) == 0);
        }
    }
}

TEST_CASE("normalize makes sibling order irrelevant") {
    Sequent a = seq({I("q"), I("p"), dia_br({I("r"), I("p")})}, O("s"));
    Sequent b = seq({dia_br({I("p"), I("r")}), I("p"), I("q")}, O("s"));
    CHECK(normalize(a) == normalize(b));
    CHECK(equal(fm(normalize(a)), fm(normalize(b))));
}

TEST_CASE("erase drops indices") {
    Sequent s = seq({dia_br({I("[1]p")}, 3)}, box_br(seq({}, O("[0]q")), 4));
    CHECK(ann(s) == std::set<int>{0, 1, 3, 4});
    CHECK(ann(erase(s)).empty());
    CHECK(erase(s) == seq({dia_br({I("box p")})}, box_br(seq({}, O("box q")))));
}

TEST_CASE("json round trip") {
    Sequent s = normalize(seq({I("p & q"), dia_br({I("[1]r")}, 7)}, box_br(seq({I("s")}, O("<2>t")), 0)));
    auto j = to_json(s);
    Sequent back = sequent_from_json(j);
    CHECK(back == s);
    CHECK(to_json(back).dump() == j.dump());
}
