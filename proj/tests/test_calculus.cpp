#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <functional>

#include "jreal/calculus.hpp"
#include "jreal/parser.hpp"
#include "support.hpp"

using namespace jreal;
using namespace jreal::testing;

namespace {
Fm F(const char* s) { return parse_formula(s); }
LItem I(const char* s) { return in(F(s)); }
RItem O(const char* s) { return out(F(s)); }

const char* kExample = "((box # -> #) -> #) -> box #";

Derivation example_proof() {
    auto d = search(F(kExample), Logic::IK, 12);
    REQUIRE(d);
    return *d;
}

std::vector<std::string> preorder(const Derivation& d) {
    std::vector<std::string> out;
    std::function<void(const Derivation&)> go = [&](const Derivation& n) {
        out.push_back(rule_name(n.rule));
        for (auto& p : n.premises) go(p);
    };
    go(d);
    return out;
}

int count_rule(const Derivation& d, Rule r) {
    int n = d.rule == r;
    for (auto& p : d.premises) n += count_rule(p, r);
    return n;
}

void retag(Derivation& d, Logic l) {
    d.logic = l;
    for (auto& p : d.premises) retag(p, l);
}

Derivation* find_rule(Derivation& d, Rule r) {
    if (d.rule == r) return &d;
    for (auto& p : d.premises)
        if (auto* x = find_rule(p, r)) return x;
    return nullptr;
}
}  // namespace

TEST_CASE("imp_r backward") {
    Sequent s = seq({I("r")}, O("p -> q"));
    Expansion e = apply_rule_backward(s, Rule::ImpR, {{}, {1}});
    REQUIRE(e.premises.size() == 1);
    CHECK(e.premises[0] == normalize(seq({I("r"), I("p")}, O("q"))));
}

TEST_CASE("box_l_dia backward") {
    Sequent s = seq({I("box p"), dia_br({I("q")})}, O("r"));
    s = normalize(s);
    int k = s.lhs[0].is_bracket() ? 1 : 0;
    Expansion e = apply_rule_backward(s, Rule::BoxLDia, {{}, {k, 1 - k}});
    REQUIRE(e.premises.size() == 1);
    CHECK(e.premises[0] == normalize(seq({dia_br({I("p"), I("q")})}, O("r"))));
}

TEST_CASE("rule errors") {
    Sequent s = seq({I("p")}, O("q"));
    CHECK_THROWS_AS(apply_rule_backward(s, Rule::ImpR, {{}, {1}}), RuleError);
    CHECK(!rule_in_logic(Rule::TL, Logic::IK));
    CHECK(rule_in_logic(Rule::TL, Logic::IKt));
    CHECK(rule_in_logic(Rule::FourLDia, Logic::IK4));
    CHECK(!rule_in_logic(Rule::FourR, Logic::IKt));
    CHECK(rule_in_logic(Rule::FourR, Logic::IS4));
}

TEST_CASE("worked example: search reproduces the printed tree") {
    Derivation d = example_proof();
    CHECK(preorder(d) ==
          std::vector<std::string>{"imp_r", "box_r", "imp_l", "imp_r", "box_l_dia", "bot_l", "bot_l"});
    CHECK(check_proof(d, Logic::IK));
    CHECK(equal(fm(d.conclusion), F(kExample)));
    // printed premises, bottom-up
    const Derivation& il = d.premises[0].premises[0];
    CHECK(il.conclusion == normalize(seq({I("(box # -> #) -> #")}, box_br(seq({}, O("#"))))));
    CHECK(il.premises[0].conclusion == normalize(seq({dia_br({})}, O("box # -> #"))));
    CHECK(il.premises[1].conclusion == normalize(seq({I("#")}, box_br(seq({}, O("#"))))));
    CHECK(il.premises[0].premises[0].premises[0].conclusion == normalize(seq({dia_br({I("#")})}, O("#"))));
}

TEST_CASE("check_proof: rule outside the logic") {
    Derivation d = example_proof();
    // replace box_l_dia by t_l on the same box, closing with bot_l
    Derivation* bl = find_rule(d, Rule::BoxLDia);
    REQUIRE(bl);
    const Lhs& l = bl->conclusion.lhs;
    int k = -1;
    for (size_t i = 0; i < l.size(); ++i)
        if (!l[i].is_bracket()) k = static_cast<int>(i);
    REQUIRE(k >= 0);
    Derivation t;
    t.logic = Logic::IKt;
    t.conclusion = bl->conclusion;
    t.rule = Rule::TL;
    t.principal = {{}, {k}};
    Sequent prem = apply_rule_backward(bl->conclusion, Rule::TL, t.principal).premises.at(0);
    Derivation leaf;
    leaf.logic = Logic::IKt;
    leaf.conclusion = prem;
    leaf.rule = Rule::BotL;
    for (size_t i = 0; i < prem.lhs.size(); ++i)
        if (!prem.lhs[i].is_bracket() && prem.lhs[i].f->op == Op::Bot) leaf.principal = {{}, {static_cast<int>(i)}};
    t.premises = {leaf};
    *bl = t;
    retag(d, Logic::IKt);
    CHECK(check_proof(d, Logic::IKt));
    retag(d, Logic::IK);
    CheckResult r = check_proof(d, Logic::IK);
    CHECK_FALSE(r);
    CHECK(r.error.find("not in") != std::string::npos);
}

TEST_CASE("check_proof: perturbed premise is reported at its node") {
    Derivation d = example_proof();
    Derivation& node = d.premises[0].premises[0].premises[1];  // bot_l leaf under imp_l
    node.conclusion = normalize(seq({I("#"), I("p")}, box_br(seq({}, O("#")))));
    CheckResult r = check_proof(d, Logic::IK);
    CHECK_FALSE(r);
    CHECK(r.node == std::vector<int>{0, 0});  // the imp_l node whose premise no longer matches
}

TEST_CASE("search: axiom instances") {
    const std::vector<std::pair<Logic, const char*>> axioms = {
        {Logic::IK, "box (p -> q) -> box p -> box q"}, {Logic::IK, "box (p -> q) -> dia p -> dia q"},
        {Logic::IK, "dia (p | q) -> dia p | dia q"},  {Logic::IK, "(dia p -> box q) -> box (p -> q)"},
        {Logic::IK, "dia # -> #"},                    {Logic::IKt, "box p -> p"},
        {Logic::IKt, "p -> dia p"},                   {Logic::IK4, "box p -> box box p"},
        {Logic::IK4, "dia dia p -> dia p"},
    };
    for (auto& [l, f] : axioms) {
        auto d = search(F(f), l, 12);
        REQUIRE_MESSAGE(d, f);
        CHECK(check_proof(*d, l));
        CHECK(equal(fm(d->conclusion), F(f)));
    }
    // t and 4 need their rules
    CHECK_FALSE(search(F("box p -> p"), Logic::IK, 8));
    CHECK_FALSE(search(F("box p -> box box p"), Logic::IKt, 8));
}

TEST_CASE("search: non-theorem is unknown") {
    for (int depth = 1; depth <= 12; ++depth) CHECK_FALSE(search(F("p"), Logic::IS4, depth));
}

TEST_CASE("decompose_impL: worked example") {
    Derivation d = example_proof();
    Derivation m = decompose_impL(d);
    CHECK_FALSE(contains_rule(m, Rule::ImpL));
    // the hoisted box bracket has an empty context, so there is nothing to contract
    CHECK(count_rule(m, Rule::Contr) == 0);
    CHECK(count_rule(m, Rule::ImpLS) == 1);
    CHECK(count_rule(m, Rule::Upd) == 1);
    CHECK(check_proof(m, Logic::IK));
    CHECK(m.conclusion == d.conclusion);
    CHECK(check_proof(erase(m), Logic::IK));
}

TEST_CASE("decompose_impL: non-empty box context is contracted") {
    auto d = search(F("((box # -> #) -> #) -> box (p -> #)"), Logic::IK, 12);
    REQUIRE(d);
    Derivation m = decompose_impL(*d);
    CHECK(count_rule(m, Rule::Contr) == 1);
    CHECK(count_rule(m, Rule::ImpLS) == 1);
    CHECK(count_rule(m, Rule::Upd) == 1);
    Derivation* c = find_rule(m, Rule::Contr);
    REQUIRE(c);
    CHECK(c->premises[0].rule == Rule::Upd);
    CHECK(c->premises[0].premises[0].rule == Rule::ImpLS);
    CHECK(check_proof(m, Logic::IK));
    CHECK(check_proof(annotate_proof(m), Logic::IK));
}

TEST_CASE("decompose_impL: identity without imp_l") {
    auto d = search(F("box p & box q -> box (p & q)"), Logic::IK, 12);
    REQUIRE(d);
    REQUIRE_FALSE(contains_rule(*d, Rule::ImpL));
    CHECK(to_json(decompose_impL(*d)).dump() == to_json(*d).dump());
}

TEST_CASE("annotate_proof: worked example") {
    Derivation a = annotate_proof(decompose_impL(example_proof()));
    CHECK(compare(fm(a.conclusion), F("(([1]# -> #) -> #) -> [0]#")) == 0);
    CHECK(check_proof(a, Logic::IK));
    CHECK(to_json(erase(a)).dump() == to_json(decompose_impL(example_proof())).dump());
}

TEST_CASE("annotate_proof: modality-free id leaf unchanged") {
    Derivation d;
    d.conclusion = seq({I("p")}, O("p"));
    d.rule = Rule::Id;
    d.principal = {{}, {0}};
    CHECK(check_proof(d, Logic::IK));
    Derivation a = annotate_proof(d);
    CHECK(to_json(a).dump() == to_json(d).dump());
}

TEST_CASE("annotate_proof: dia_r gets a fresh positive box bracket") {
    auto d = search(F("box (p -> q) -> dia p -> dia q"), Logic::IK, 12);
    REQUIRE(d);
    Derivation a = annotate_proof(decompose_impL(*d));
    REQUIRE(check_proof(a, Logic::IK));
    Derivation* dr = find_rule(a, Rule::DiaR);
    REQUIRE(dr);
    Expansion e = matched_expansion(*dr);
    CHECK(e.fresh % 4 == 0);
    CHECK_FALSE(ann(dr->conclusion).count(e.fresh));
    CHECK(ann(dr->premises[0].conclusion).count(e.fresh));
}

TEST_CASE("properties on random proofs") {
    Rng g(31);
    const Logic logics[] = {Logic::IK, Logic::IKt, Logic::IK4, Logic::IS4};
    int proved = 0;
    for (int i = 0; i < 3000 && proved < 150; ++i) {
        int mods = 0;
        Fm f = random_formula(g, 4, mods, 3);
        Logic l = logics[pick(g, 4)];
        auto d = search(f, l, 6, 20000);
        if (!d) continue;
        ++proved;
        CHECK(check_proof(*d, l));  // soundness of search
        // replay determinism
        auto j = to_json(*d);
        Derivation back = derivation_from_json(j);
        CHECK(to_json(back).dump() == j.dump());
        CHECK(check_proof(back, l));
        // macro conservation and annotation erasure
        Derivation m = decompose_impL(*d);
        CHECK(equal(fm(m.conclusion), fm(d->conclusion)));
        CHECK_FALSE(contains_rule(m, Rule::ImpL));
        CHECK(count_rule(m, Rule::ImpLS) == count_rule(*d, Rule::ImpL));
        Derivation a = annotate_proof(m);
        CHECK(check_proof(a, l));
        CHECK(check_proof(erase(a), l));
        std::string why;
        CHECK(properly_annotated(fm(a.conclusion), true, &why));
    }
    CHECK(proved >= 100);
}

TEST_CASE("proof json rejects unknown keys") {
    auto j = to_json(example_proof());
    j["extra"] = 1;
    CHECK_THROWS(derivation_from_json(j));
}
