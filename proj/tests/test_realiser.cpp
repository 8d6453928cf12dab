#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "jreal/parser.hpp"
#include "jreal/pipeline.hpp"
#include "jreal/realiser.hpp"
#include "support.hpp"

using namespace jreal;
using namespace jreal::testing;

namespace {
Fm F(const char* s) { return parse_formula(s); }
JFm J(const char* s) { return parse_jformula(s); }

RealiserError::Kind error_kind(const std::function<void()>& f) {
    try {
        f();
    } catch (const RealiserError& e) {
        return e.kind;
    }
    FAIL("expected a realiser error");
    return RealiserError::Internal;
}

JFm proved(const ProofBuilder& b, int step) {
    REQUIRE(step >= 0);
    JFm f = check(b.extract(step));
    CHECK(equal(f, b.formula(step)));
    return f;
}

Derivation leaf(Sequent s, Rule r, Position p) {
    Derivation d;
    d.conclusion = std::move(s);
    d.rule = r;
    d.principal = std::move(p);
    REQUIRE(check_proof(d, Logic::IK));
    return d;
}

const Derivation* find_rule(const Derivation& d, Rule r) {
    if (d.rule == r) return &d;
    for (auto& p : d.premises)
        if (auto* x = find_rule(p, r)) return x;
    return nullptr;
}
}  // namespace

TEST_CASE("union of realisations") {
    Realisation r = {{1, pvar(0)}};
    Realisation r2 = {{1, pvar(0)}, {0, cnst(3)}};
    Realisation u = union_real(r, r2);
    CHECK(u.size() == 2);
    CHECK(equal(u.at(0), cnst(3)));
    CHECK(error_kind([] { union_real({{0, cnst(0)}}, {{0, cnst(1)}}); }) == RealiserError::IllegalUnion);
    // overlap is allowed on odd indices only, even when the terms agree
    CHECK(error_kind([] { union_real({{0, cnst(0)}}, {{0, cnst(0)}}); }) == RealiserError::IllegalUnion);
}

TEST_CASE("compose with a substitution") {
    Fm a = F("[1]p -> [0]p");
    Realisation r = {{1, pvar(0)}, {0, sum(rpvar(0), pvar(0))}};
    Subst bad;
    bad.m[{'x', 0}] = cnst(0);
    CHECK(error_kind([&] { compose(bad, r, a); }) == RealiserError::IllegalCompose);
    Subst ok;
    ok.m[{'y', 0}] = app(cnst(2), pvar(0));
    Realisation c = compose(ok, r, a);
    CHECK(equal(apply_realisation(c, a), ok.apply(apply_realisation(r, a))));
    CHECK(equal(apply_realisation(c, a), J("x0:p -> (c2*x0+x0):p")));
}

TEST_CASE("compose law on random realisations") {
    Rng g(51);
    int n = 0;
    while (n < 100) {
        int mods = 0;
        Fm a = properly_annotate(random_formula(g, 4, mods, 4), 0);
        Realisation r = random_realisation(g, a);
        JFm j;
        try {
            j = apply_realisation(r, a);
        } catch (const RealisationError&) {
            continue;
        }
        ++n;
        std::set<Var> free = vars(j);
        for (auto& v : negvar(a)) free.erase(v);
        Subst s = random_subst(g, free);
        CHECK(equal(apply_realisation(compose(s, r, a), a), s.apply(j)));
    }
}

TEST_CASE("adding a box index keeps a realisation") {
    Fm inner = F("<3>p -> p");
    Realisation r = {{3, svar(0)}};
    CHECK(equal(apply_realisation(r, inner), J("a0:p -> p")));
    Realisation r4 = r;
    r4[4] = cnst(5);
    CHECK(equal(apply_realisation(r4, F("[4](<3>p -> p)")), J("c5:(a0:p -> p)")));
    Realisation back = restrict(r4, inner);
    REQUIRE(back.size() == 1);
    CHECK(equal(back.at(3), svar(0)));
}

TEST_CASE("recipe realises negatives by variables and positives by reserved ones") {
    Realisation r = recipe({0, 1, 2, 3, 5});
    CHECK(equal(r.at(0), rpvar(0)));
    CHECK(equal(r.at(1), pvar(0)));
    CHECK(equal(r.at(2), rsvar(0)));
    CHECK(equal(r.at(3), svar(0)));
    CHECK(equal(r.at(5), pvar(1)));
    CHECK(var_of(7) == Var{'a', 1});
}

TEST_CASE("merge: sum on a positive box") {
    ProofBuilder b(Logic::IK);
    Fm a = F("[0]p");
    MergeResult m = merge(b, a, {{0, cnst(0)}}, {{0, cnst(1)}});
    CHECK(equal(m.r.at(0), sum(cnst(0), cnst(1))));
    CHECK(m.sigma.dom().empty());
    REQUIRE(m.certs.size() == 1);
    CHECK(equal(proved(b, m.certs[0][0]), J("c0:p -> (c0+c1):p")));
    CHECK(equal(proved(b, m.certs[0][1]), J("c1:p -> (c0+c1):p")));
}

TEST_CASE("merge: modality-free formula") {
    ProofBuilder b(Logic::IK);
    Fm a = F("(p -> q) -> p & q");
    MergeResult m = merge(b, a, {}, {});
    CHECK(m.r.empty());
    CHECK(m.sigma.dom().empty());
    for (auto& sc : m.all)
        for (int c : sc.cert)
            if (c >= 0) proved(b, c);
}

TEST_CASE("merge: negative box keeps the forced variable") {
    ProofBuilder b(Logic::IK);
    Realisation r = {{1, pvar(0)}};
    MergeResult m = merge_items(b, {{F("[1]p"), false}}, r, r);
    CHECK(equal(m.r.at(1), pvar(0)));
    CHECK(m.sigma.dom().empty());
}

TEST_CASE("merge: sequent form on a one-bracket sequent") {
    ProofBuilder b(Logic::IK);
    Sequent s = seq({in(F("[1]p"))}, box_br(seq({}, out(F("p"))), 0));
    Realisation r1 = {{1, pvar(0)}, {0, app(cnst(0), pvar(0))}};
    Realisation r2 = {{1, pvar(0)}, {0, cnst(1)}};
    MergeResult m = merge_sequent(b, s, {}, r1, r2);
    CHECK(equal(m.r.at(0), sum(app(cnst(0), pvar(0)), cnst(1))));
    CHECK(m.sigma.dom().empty());
    JFm mine = apply_realisation(m.r, fm(s));
    REQUIRE_FALSE(m.certs.empty());
    CHECK(equal(proved(b, m.certs[0][0]), jimp(apply_realisation(r1, fm(s)), mine)));
    CHECK(equal(proved(b, m.certs[0][1]), jimp(apply_realisation(r2, fm(s)), mine)));
}

TEST_CASE("merge: properties on random realisations") {
    Rng g(52);
    int n = 0;
    while (n < 60) {
        int mods = 0;
        Fm raw = random_formula(g, 4, mods, 4);
        Fm a = properly_annotate(raw, 0);
        Realisation r1 = random_realisation(g, a), r2 = random_realisation(g, a);
        try {
            apply_realisation(r1, a);
            apply_realisation(r2, a);
        } catch (const RealisationError&) {
            continue;
        }
        ++n;
        ProofBuilder b(Logic::IK);
        MergeResult m = merge(b, a, r1, r2);
        auto nv = negvar(a);
        for (auto& v : m.sigma.dom()) CHECK(nv.count(v));
        JFm mine = apply_realisation(m.r, a);
        CHECK(equal(forget(mine), raw));
        for (int i = 0; i < 2; ++i) {
            const Realisation& ri = i ? r2 : r1;
            JFm side = m.sigma.apply(apply_realisation(ri, a));
            int c = m.certs.at(0)[i];
            if (c < 0)
                CHECK(equal(side, mine));
            else
                CHECK(equal(proved(b, c), jimp(side, mine)));
        }
    }
}

TEST_CASE("realise_leaf: id on a modality-free sequent") {
    ProofBuilder b(Logic::IK);
    Derivation d = leaf(seq({in(F("p"))}, out(F("p"))), Rule::Id, {{}, {0}});
    StepResult s = realise_leaf(b, d);
    CHECK(s.r.empty());
    CHECK(equal(proved(b, s.theorem), J("p -> p")));
}

TEST_CASE("realise_leaf: bot beside a box") {
    ProofBuilder b(Logic::IK);
    Derivation d = leaf(seq({in(mk_bot())}, box_br(seq({}, out(mk_bot())), 0)), Rule::BotL, {{}, {0}});
    StepResult s = realise_leaf(b, d);
    CHECK(equal(s.r.at(0), rpvar(0)));
    CHECK(equal(proved(b, s.theorem), J("# -> y^0:#")));
}

TEST_CASE("realise_leaf: bot inside a diamond") {
    ProofBuilder b(Logic::IK);
    Derivation d = leaf(seq({dia_br({in(mk_bot())}, 3)}, out(mk_bot())), Rule::BotL, {{0}, {0}});
    StepResult s = realise_leaf(b, d);
    CHECK(equal(s.r.at(3), svar(0)));
    CHECK(equal(proved(b, s.theorem), J("a0:# -> #")));
}

TEST_CASE("realise_leaf: not an axiom") {
    ProofBuilder b(Logic::IK);
    Derivation d;
    d.conclusion = seq({in(F("p"))}, out(F("p")));
    d.rule = Rule::ImpR;
    d.principal = {{}, {1}};
    CHECK(error_kind([&] { realise_leaf(b, d); }) == RealiserError::NotAxiomatic);
}

TEST_CASE("step wrappers reject the other family") {
    PipelineResult pr = run_pipeline(F("((box # -> #) -> #) -> box #"), Logic::IK);
    REQUIRE(pr.status == PipelineResult::Ok);
    const Derivation& a = *pr.annotated;
    ProofBuilder b(Logic::IK);
    const Derivation* il = find_rule(a, Rule::ImpLS);
    const Derivation* ir = find_rule(a, Rule::ImpR);
    REQUIRE(il);
    REQUIRE(ir);
    CHECK(error_kind([&] { realise_right_step(b, *il, {}); }) == RealiserError::MalformedStep);
    CHECK(error_kind([&] { realise_left_step(b, *ir, {}); }) == RealiserError::MalformedStep);
}

TEST_CASE("realise_proof rejects plain imp_l") {
    auto d = search(F("((box # -> #) -> #) -> box #"), Logic::IK, 12);
    REQUIRE(d);
    Derivation a = annotate_proof(*d);
    CHECK(error_kind([&] { realise_proof(a, Logic::IK); }) == RealiserError::MalformedStep);
}

TEST_CASE("realise_proof: worked example") {
    PipelineResult pr = run_pipeline(F("((box # -> #) -> #) -> box #"), Logic::IK);
    REQUIRE(pr.status == PipelineResult::Ok);
    const Realised& r = *pr.realised;
    CHECK(pr.cert_ok);
    CHECK(pr.roundtrip_ok);
    CHECK(pr.normal_ok);
    CHECK(equal(r.r.at(1), pvar(0)));
    CHECK(ground(r.r.at(0)) == false);
    CHECK(equal(forget(r.formula), F("((box # -> #) -> #) -> box #")));
    CHECK(equal(check(r.certificate), r.formula));
    // the antecedent is realised by the forced variable
    CHECK(equal(r.formula->l, J("(x0:# -> #) -> #")));
    // the box term comes from lifting an update of the reserved variable
    std::function<bool(const Tm&)> has_update = [&](const Tm& t) {
        if (!t) return false;
        if (t->op == TOp::Update) return true;
        return has_update(t->a) || has_update(t->b);
    };
    CHECK(has_update(r.r.at(0)));
}

TEST_CASE("realise_proof: k2 diamond instance") {
    Fm k2 = F("box (p -> q) -> dia p -> dia q");
    PipelineResult pr = run_pipeline(k2, Logic::IK);
    REQUIRE(pr.status == PipelineResult::Ok);
    const JFm& f = pr.realised->formula;
    CHECK(equal(forget(f), k2));
    CHECK(equal(check(pr.realised->certificate), f));
    REQUIRE(f->r->r->op == JOp::Sat);
    CHECK(f->l->op == JOp::Just);
    CHECK(equal(f->l->t, pvar(0)));
    CHECK(equal(f->r->l->t, svar(0)));
}

TEST_CASE("realise_proof: modality-free id proof") {
    Derivation d;
    d.conclusion = seq({}, out(F("p -> p")));
    d.rule = Rule::ImpR;
    d.principal = {{}, {0}};
    Derivation top;
    top.conclusion = seq({in(F("p"))}, out(F("p")));
    top.rule = Rule::Id;
    top.principal = {{}, {0}};
    d.premises = {top};
    REQUIRE(check_proof(d, Logic::IK));
    Realised r = realise_proof(d, Logic::IK);
    CHECK(r.r.empty());
    CHECK(equal(r.formula, J("p -> p")));
    CHECK(equal(check(r.certificate), r.formula));
}

TEST_CASE("realise_proof: random proofs across logics") {
    Rng g(53);
    const Logic logics[] = {Logic::IK, Logic::IKt, Logic::IK4, Logic::IS4};
    int n = 0;
    for (int i = 0; i < 4000 && n < 80; ++i) {
        int mods = 0;
        Fm f = random_formula(g, 4, mods, 3);
        Logic l = logics[pick(g, 4)];
        auto d = search(f, l, 6, 20000);
        if (!d) continue;
        ++n;
        PipelineResult pr = realise_derivation(*d, {});
        REQUIRE_MESSAGE(pr.status == PipelineResult::Ok, to_string(f) << ": " << pr.error);
        CHECK(pr.cert_ok);
        CHECK(pr.roundtrip_ok);
        CHECK(pr.normal_ok);
        const Realised& r = *pr.realised;
        CHECK(equal(forget(r.formula), f));
        // negative annotations carry their forced variable
        for (auto& [k, t] : r.r)
            if (k % 2 == 1) CHECK(equal(t, forced_var(k)));
    }
    CHECK(n >= 60);
}

TEST_CASE("realised json") {
    PipelineResult pr = run_pipeline(F("box p & box q -> box (p & q)"), Logic::IK);
    REQUIRE(pr.status == PipelineResult::Ok);
    auto j = to_json(*pr.realised);
    CHECK(j.contains("formula"));
    CHECK(j.contains("certificate"));
    JLProof c = jlproof_from_json(j["certificate"]);
    CHECK(equal(check(c), pr.realised->formula));
}
