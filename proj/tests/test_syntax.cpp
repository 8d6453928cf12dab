#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "jreal/parser.hpp"
#include "jreal/syntax.hpp"
#include "support.hpp"

using namespace jreal;
using namespace jreal::testing;

namespace {
Fm F(const char* s) { return parse_formula(s); }
JFm J(const char* s) { return parse_jformula(s); }
}  // namespace

TEST_CASE("forget: single clause") { CHECK(equal(forget(J("x0:p")), F("[]p"))); }

TEST_CASE("forget: worked example formula") {
    CHECK(equal(forget(J("((x0:# -> #) -> #) -> (c0*(a0|>y^0)):#")), F("(([]# -> #) -> #) -> []#")));
}

TEST_CASE("forget: jk5 projects to k5") { CHECK(equal(forget(J("a0:# -> #")), F("<># -> #"))); }

TEST_CASE("polarity_at") {
    CHECK(polarity_at(F("p -> q"), {0}) == Polarity::Negative);
    CHECK(polarity_at(F("p -> q"), {}) == Polarity::Positive);
    CHECK(polarity_at(F("(p -> q) -> r"), {0, 0}) == Polarity::Positive);
    CHECK_THROWS_AS(polarity_at(F("p"), {0}), PathError);
}

TEST_CASE("properly_annotate: worked example endsequent") {
    Fm a = properly_annotate(F("((box # -> #) -> #) -> box #"), 0);
    CHECK(compare(a, F("(([1]# -> #) -> #) -> [0]#")) == 0);
    CHECK(negvar(a) == std::set<Var>{{'x', 0}});
    CHECK(equal(erase(a), F("((box # -> #) -> #) -> box #")));
}

TEST_CASE("properly_annotate: residues") {
    CHECK(compare(properly_annotate(F("box p"), 0), F("[0]p")) == 0);
    Fm a = properly_annotate(F("<>p -> q"), 0);
    REQUIRE(a->l->op == Op::Dia);
    CHECK(a->l->idx % 4 == 3);
}

TEST_CASE("properly_annotate: laws on random formulas") {
    Rng g(11);
    for (int i = 0; i < 300; ++i) {
        int mods = 0;
        Fm f = random_formula(g, 5, mods, 6);
        Fm a = properly_annotate(f, 0);
        std::string why;
        CHECK_MESSAGE(properly_annotated(a, true, &why), why);
        CHECK(equal(erase(a), f));
        CHECK(compare(properly_annotate(f, 0), a) == 0);  // deterministic
        CHECK(ann(a).size() == static_cast<size_t>(mods));
        // parity vs polarity, by an independent walk
        std::function<void(const Fm&, bool)> walk = [&](const Fm& x, bool pos) {
            if (x->op == Op::Box || x->op == Op::Dia) {
                CHECK((x->idx % 2 == 0) == pos);
                CHECK((x->op == Op::Box) == (x->idx % 4 < 2));
            }
            if (x->op == Op::Imp) {
                walk(x->l, !pos);
                walk(x->r, pos);
            } else {
                if (x->l) walk(x->l, pos);
                if (x->r) walk(x->r, pos);
            }
        };
        walk(a, true);
    }
}

TEST_CASE("erase") {
    CHECK(equal(erase(F("[0]p")), F("box p")));
    CHECK(equal(erase(F("(([1]# -> #) -> #) -> [0]#")), F("((box # -> #) -> #) -> box #")));
}

TEST_CASE("apply_realisation: worked example shape") {
    Realisation r = {{0, cnst(0)}, {1, pvar(0)}};
    CHECK(equal(apply_realisation(r, F("(([1]# -> #) -> #) -> [0]#")), J("((x0:# -> #) -> #) -> c0:#")));
    CHECK(equal(apply_realisation({}, F("p -> p")), J("p -> p")));
}

TEST_CASE("apply_realisation: errors") {
    Realisation self = {{3, svar(0)}, {2, svar(0)}};
    try {
        apply_realisation(self, F("<3><2>p"));
        FAIL("expected SelfReferentialSatisfier");
    } catch (const RealisationError& e) {
        CHECK(e.kind == RealisationError::SelfReferentialSatisfier);
    }
    try {
        apply_realisation({}, F("[0]p"));
        FAIL("expected MissingIndex");
    } catch (const RealisationError& e) {
        CHECK(e.kind == RealisationError::MissingIndex);
    }
    try {
        apply_realisation({{0, svar(0)}}, F("[0]p"));
        FAIL("expected ResidueMismatch");
    } catch (const RealisationError& e) {
        CHECK(e.kind == RealisationError::ResidueMismatch);
    }
    try {
        apply_realisation({{1, pvar(2)}}, F("[1]p -> p"));
        FAIL("expected ResidueMismatch");
    } catch (const RealisationError& e) {
        CHECK(e.kind == RealisationError::ResidueMismatch);
    }
}

TEST_CASE("negvar and ann") {
    CHECK(ann(F("p -> p")).empty());
    CHECK(negvar(F("<7>p")) == std::set<Var>{{'a', 1}});
    // brute force over residues against the definition
    for (int i = 0; i < 40; ++i) {
        std::set<Var> want;
        if (i % 4 == 1) want.insert({'x', (i - 1) / 4});
        if (i % 4 == 3) want.insert({'a', (i - 3) / 4});
        CHECK(negvar_of({i}) == want);
    }
    CHECK(vars(J("(x0 + y^1):p -> (c0@a2):q")) == std::set<Var>{{'x', 0}, {'y', 1}, {'a', 2}});
}

TEST_CASE("projection round trip on random realisations") {
    Rng g(12);
    int n = 0;
    while (n < 200) {
        int mods = 0;
        Fm a = properly_annotate(random_formula(g, 5, mods, 5), 0);
        Realisation r = random_realisation(g, a);
        JFm j;
        try {
            j = apply_realisation(r, a);
        } catch (const RealisationError&) {
            continue;
        }
        ++n;
        CHECK(equal(forget(j), erase(a)));
        CHECK(normal_realisation(r, a));
    }
}

TEST_CASE("normality validator") {
    Fm a = F("[1]p -> [5]q -> [0]p");
    CHECK(normal_realisation({{1, pvar(0)}, {5, pvar(1)}, {0, cnst(0)}}, a));
    std::string why;
    CHECK_FALSE(normal_realisation({{1, cnst(0)}, {5, pvar(1)}, {0, cnst(0)}}, a, &why));
    CHECK(!why.empty());
}

TEST_CASE("ground") {
    CHECK(ground(parse_term("c0*c1+!c2")));
    CHECK_FALSE(ground(parse_term("c0*(a0|>c1)")));
    CHECK_FALSE(ground(parse_term("c0@a^0")));
}

TEST_CASE("parser: grammar") {
    CHECK(equal(F("p -> q -> r"), mk_imp(mk_atom("p"), mk_imp(mk_atom("q"), mk_atom("r")))));
    CHECK(equal(F("[]p & <>q"), F("box p & dia q")));
    CHECK(equal(J("a0|>y^0 : p"), just(update(svar(0), rpvar(0)), jatom("p"))));
    CHECK(equal(J("t_1 -> x0:p -> q"), jimp(jatom("t_1"), jimp(just(pvar(0), jatom("p")), jatom("q")))));
    CHECK(equal(J("(c0*x0@a0):p"), sat(prop(app(cnst(0), pvar(0)), svar(0)), jatom("p"))));
    CHECK(equal(J("(a0 U a^1):q"), sat(uni(svar(0), rsvar(1)), jatom("q"))));
    CHECK(equal(J("!x0+c1:p"), just(sum(bang(pvar(0)), cnst(1)), jatom("p"))));
}

TEST_CASE("parser: errors carry line and column") {
    try {
        F("p -> (q");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(e.col == 8);
    }
    try {
        F("p &\n  & q");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.col == 3);
    }
    CHECK_THROWS_AS(F("[2]p"), ParseError);
    CHECK_THROWS_AS(J("x0 + a0 : p"), ParseError);
}

TEST_CASE("printer round trip") {
    Rng g(13);
    TermPool pool;
    pool.pvars = {0, 3};
    pool.svars = {1};
    for (int i = 0; i < 300; ++i) {
        JFm j = random_jformula(g, 4, pool);
        CHECK(equal(parse_jformula(to_string(j)), j));
        int mods = 0;
        Fm f = random_formula(g, 5, mods, 4);
        CHECK(equal(parse_formula(to_string(f)), f));
        Fm a = properly_annotate(f, 0);
        CHECK(compare(parse_formula(to_string(a)), a) == 0);
    }
}

TEST_CASE("substitution") {
    Subst s;
    s.m[{'x', 0}] = sum(cnst(1), pvar(0));
    CHECK(equal(s.apply(J("x0:p -> p")), J("(c1+x0):p -> p")));
    CHECK(s.dom() == std::set<Var>{{'x', 0}});
    Subst t;
    t.m[{'x', 0}] = pvar(0);
    CHECK(t.dom().empty());
    Subst u;
    u.m[{'a', 0}] = prop(cnst(0), svar(1));
    Subst c = u.after(s);
    CHECK(equal(c.apply(J("x0:p -> a0:q")), J("(c1+x0):p -> (c0@a1):q")));
}
