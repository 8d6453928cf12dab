#include "jreal/jl_hilbert.hpp"

#include <algorithm>
#include <functional>

#include "jreal/parser.hpp"

namespace jreal {

namespace {
const std::vector<std::pair<Schema, const char*>> kSchemaNames = {
    {Schema::K, "K"},          {Schema::S, "S"},          {Schema::AndI, "and_i"},   {Schema::AndE1, "and_e1"},
    {Schema::AndE2, "and_e2"}, {Schema::OrI1, "or_i1"},   {Schema::OrI2, "or_i2"},   {Schema::OrE, "or_e"},
    {Schema::BotE, "bot_e"},   {Schema::Jk1, "jk1"},      {Schema::Jk2, "jk2"},      {Schema::Jk3, "jk3"},
    {Schema::Jk4, "jk4"},      {Schema::Jk5, "jk5"},      {Schema::JSumL, "jsum_l"}, {Schema::JSumR, "jsum_r"},
    {Schema::JUniL, "juni_l"}, {Schema::JUniR, "juni_r"}, {Schema::JtBox, "jt_box"}, {Schema::JtDia, "jt_dia"},
    {Schema::J4Box, "j4_box"}, {Schema::J4Dia, "j4_dia"},
};

bool eq(const JFm& a, const JFm& b) { return compare(a, b) == 0; }
bool eqt(const Tm& a, const Tm& b) { return compare(a, b) == 0; }
bool is(const JFm& f, JOp op) { return f && f->op == op; }
bool imp(const JFm& f) { return is(f, JOp::Imp); }
bool tis(const Tm& t, TOp op) { return t && t->op == op; }
}  // namespace

std::string schema_name(Schema s) {
    for (auto& [k, n] : kSchemaNames)
        if (k == s) return n;
    return "?";
}

Schema schema_from_name(const std::string& s) {
    for (auto& [k, n] : kSchemaNames)
        if (s == n) return k;
    throw std::invalid_argument("unknown schema '" + s + "'");
}

bool schema_in_logic(Schema s, Logic l) {
    switch (s) {
        case Schema::JtBox:
        case Schema::JtDia:
            return has_t(l);
        case Schema::J4Box:
        case Schema::J4Dia:
            return has_4(l);
        default:
            return true;
    }
}

std::string jlogic_name(Logic l) { return "j" + logic_name(l); }

Logic jlogic_from_name(const std::string& s) {
    if (s.size() < 2 || s[0] != 'j') throw std::invalid_argument("unknown justification logic '" + s + "'");
    return logic_from_name(s.substr(1));
}

bool is_instance(Schema s, const JFm& f) {
    if (!imp(f)) return false;
    const JFm& a = f->l;
    const JFm& b = f->r;
    switch (s) {
        case Schema::K:
            return imp(b) && eq(a, b->r);
        case Schema::S:
            // (A -> (B -> C)) -> ((A -> B) -> (A -> C))
            return imp(a) && imp(a->r) && imp(b) && imp(b->l) && imp(b->r) && eq(b->l->l, a->l) &&
                   eq(b->l->r, a->r->l) && eq(b->r->l, a->l) && eq(b->r->r, a->r->r);
        case Schema::AndI:
            return imp(b) && is(b->r, JOp::And) && eq(b->r->l, a) && eq(b->r->r, b->l);
        case Schema::AndE1:
            return is(a, JOp::And) && eq(a->l, b);
        case Schema::AndE2:
            return is(a, JOp::And) && eq(a->r, b);
        case Schema::OrI1:
            return is(b, JOp::Or) && eq(b->l, a);
        case Schema::OrI2:
            return is(b, JOp::Or) && eq(b->r, a);
        case Schema::OrE:
            // (A -> C) -> ((B -> C) -> ((A | B) -> C))
            return imp(a) && imp(b) && imp(b->l) && imp(b->r) && is(b->r->l, JOp::Or) &&
                   eq(b->l->r, a->r) && eq(b->r->r, a->r) && eq(b->r->l->l, a->l) && eq(b->r->l->r, b->l->l);
        case Schema::BotE:
            return is(a, JOp::Bot);
        case Schema::Jk1:
            // s:(A -> B) -> (t:A -> (s*t):B)
            return is(a, JOp::Just) && imp(a->l) && imp(b) && is(b->l, JOp::Just) && is(b->r, JOp::Just) &&
                   eq(b->l->l, a->l->l) && tis(b->r->t, TOp::App) && eqt(b->r->t->a, a->t) &&
                   eqt(b->r->t->b, b->l->t) && eq(b->r->l, a->l->r);
        case Schema::Jk2:
            // s:(A -> B) -> (mu:A -> (s@mu):B)
            return is(a, JOp::Just) && imp(a->l) && imp(b) && is(b->l, JOp::Sat) && is(b->r, JOp::Sat) &&
                   eq(b->l->l, a->l->l) && tis(b->r->t, TOp::Prop) && eqt(b->r->t->a, a->t) &&
                   eqt(b->r->t->b, b->l->t) && eq(b->r->l, a->l->r);
        case Schema::Jk3:
            // mu:(A | B) -> (mu:A | mu:B)
            return is(a, JOp::Sat) && is(a->l, JOp::Or) && is(b, JOp::Or) && is(b->l, JOp::Sat) &&
                   is(b->r, JOp::Sat) && eqt(b->l->t, a->t) && eqt(b->r->t, a->t) && eq(b->l->l, a->l->l) &&
                   eq(b->r->l, a->l->r);
        case Schema::Jk4:
            // (mu:A -> t:B) -> (mu|>t):(A -> B)
            return imp(a) && is(a->l, JOp::Sat) && is(a->r, JOp::Just) && is(b, JOp::Just) &&
                   tis(b->t, TOp::Update) && eqt(b->t->a, a->l->t) && eqt(b->t->b, a->r->t) && imp(b->l) &&
                   eq(b->l->l, a->l->l) && eq(b->l->r, a->r->l);
        case Schema::Jk5:
            return is(a, JOp::Sat) && is(a->l, JOp::Bot) && is(b, JOp::Bot);
        case Schema::JSumL:
        case Schema::JSumR:
            return is(a, JOp::Just) && is(b, JOp::Just) && tis(b->t, TOp::Sum) && eq(a->l, b->l) &&
                   eqt(s == Schema::JSumL ? b->t->a : b->t->b, a->t);
        case Schema::JUniL:
        case Schema::JUniR:
            return is(a, JOp::Sat) && is(b, JOp::Sat) && tis(b->t, TOp::Union) && eq(a->l, b->l) &&
                   eqt(s == Schema::JUniL ? b->t->a : b->t->b, a->t);
        case Schema::JtBox:
            return is(a, JOp::Just) && eq(a->l, b);
        case Schema::JtDia:
            return is(b, JOp::Sat) && eq(b->l, a);
        case Schema::J4Box:
            return is(a, JOp::Just) && is(b, JOp::Just) && tis(b->t, TOp::Bang) && eqt(b->t->a, a->t) &&
                   eq(b->l, a);
        case Schema::J4Dia:
            return is(a, JOp::Sat) && is(a->l, JOp::Sat) && eq(a->l, b);
    }
    return false;
}

std::optional<Schema> axiom_schema(const JFm& f, Logic l) {
    for (auto& [k, n] : kSchemaNames)
        if (schema_in_logic(k, l) && is_instance(k, f)) return k;
    return std::nullopt;
}

JFm can_formula(const std::vector<int>& consts, const JFm& inner) {
    JFm f = inner;
    for (int c : consts) f = just(cnst(c), f);
    return f;
}

std::vector<JFm> check_all(const JLProof& p) {
    std::vector<JFm> fs;
    for (size_t i = 0; i < p.steps.size(); ++i) {
        const JStep& st = p.steps[i];
        int n = static_cast<int>(i);
        switch (st.kind) {
            case JStep::Axiom:
                if (!st.formula) throw JLCheckError(JLCheckError::BadAxiomInstance, n, "missing formula");
                if (!schema_in_logic(st.schema, p.logic))
                    throw JLCheckError(JLCheckError::SchemaNotInLogic, n,
                                       schema_name(st.schema) + " is not an axiom of " + jlogic_name(p.logic));
                if (!is_instance(st.schema, st.formula))
                    throw JLCheckError(JLCheckError::BadAxiomInstance, n,
                                       to_string(st.formula) + " is not an instance of " + schema_name(st.schema));
                fs.push_back(st.formula);
                break;
            case JStep::Can: {
                if (!st.formula || st.consts.empty()) throw JLCheckError(JLCheckError::BadCan, n, "malformed can step");
                if (!axiom_schema(st.formula, p.logic)) {
                    // Distinguish "axiom of a stronger logic" from "not an axiom".
                    for (Logic l : {Logic::IS4})
                        if (axiom_schema(st.formula, l))
                            throw JLCheckError(JLCheckError::SchemaNotInLogic, n,
                                               "can premise is not an axiom of " + jlogic_name(p.logic));
                    throw JLCheckError(JLCheckError::BadCan, n, to_string(st.formula) + " is not an axiom instance");
                }
                fs.push_back(can_formula(st.consts, st.formula));
                break;
            }
            case JStep::MP: {
                if (st.maj < 0 || st.min < 0 || st.maj >= n || st.min >= n)
                    throw JLCheckError(JLCheckError::BadMP, n, "reference to a later or missing step");
                const JFm& maj = fs[st.maj];
                if (!imp(maj) || !eq(maj->l, fs[st.min]))
                    throw JLCheckError(JLCheckError::BadMP, n, "major premise does not match the minor premise");
                fs.push_back(maj->r);
                break;
            }
        }
    }
    return fs;
}

JFm check(const JLProof& p) {
    if (p.steps.empty()) throw JLCheckError(JLCheckError::Empty, 0, "empty proof");
    return check_all(p).back();
}

JLProof subst_proof(const Subst& s, const JLProof& p) {
    JLProof q = p;
    if (s.empty()) return q;
    for (auto& st : q.steps)
        if (st.formula) st.formula = s.apply(st.formula);
    return q;
}

nlohmann::json to_json(const JLProof& p) {
    nlohmann::json steps = nlohmann::json::array();
    for (auto& st : p.steps) {
        nlohmann::json j;
        switch (st.kind) {
            case JStep::Axiom:
                j["kind"] = "axiom";
                j["schema"] = schema_name(st.schema);
                j["formula"] = to_string(st.formula);
                break;
            case JStep::Can:
                j["kind"] = "can";
                j["consts"] = st.consts;
                j["formula"] = to_string(st.formula);
                break;
            case JStep::MP:
                j["kind"] = "mp";
                j["maj"] = st.maj;
                j["min"] = st.min;
                break;
        }
        steps.push_back(j);
    }
    return {{"logic", jlogic_name(p.logic)}, {"steps", steps}};
}

namespace {
void only_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
            throw std::invalid_argument("unknown key '" + it.key() + "'");
}
}  // namespace

JLProof jlproof_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("logic") || !j.contains("steps"))
        throw std::invalid_argument("certificate needs 'logic' and 'steps'");
    only_keys(j, {"logic", "steps"});
    JLProof p;
    p.logic = jlogic_from_name(j.at("logic").get<std::string>());
    for (auto& s : j.at("steps")) {
        JStep st;
        only_keys(s, {"kind", "schema", "formula", "consts", "maj", "min"});
        std::string kind = s.at("kind").get<std::string>();
        if (kind == "axiom") {
            st.kind = JStep::Axiom;
            st.schema = schema_from_name(s.at("schema").get<std::string>());
            st.formula = parse_jformula(s.at("formula").get<std::string>());
        } else if (kind == "can") {
            st.kind = JStep::Can;
            st.consts = s.at("consts").get<std::vector<int>>();
            st.formula = parse_jformula(s.at("formula").get<std::string>());
        } else if (kind == "mp") {
            st.kind = JStep::MP;
            st.maj = s.at("maj").get<int>();
            st.min = s.at("min").get<int>();
        } else {
            throw std::invalid_argument("unknown step kind '" + kind + "'");
        }
        p.steps.push_back(st);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Builder

int ProofBuilder::push(JStep st, JFm f) {
    auto it = index_.find(f);
    if (it != index_.end()) return it->second;
    int n = static_cast<int>(steps_.size());
    steps_.emplace_back(std::move(st), f);
    index_.emplace(f, n);
    return n;
}

int ProofBuilder::axiom(Schema s, const JFm& f) {
    if (!schema_in_logic(s, logic_)) throw std::logic_error(schema_name(s) + " is not available in " + jlogic_name(logic_));
    if (!is_instance(s, f)) throw std::logic_error(to_string(f) + " is not an instance of " + schema_name(s));
    JStep st;
    st.kind = JStep::Axiom;
    st.schema = s;
    st.formula = f;
    return push(st, f);
}

int ProofBuilder::can(const std::vector<int>& consts, const JFm& inner) {
    if (consts.empty() || !axiom_schema(inner, logic_)) throw std::logic_error("can needs an axiom instance");
    JStep st;
    st.kind = JStep::Can;
    st.consts = consts;
    st.formula = inner;
    for (int c : consts) next_const_ = std::max(next_const_, c + 1);
    return push(st, can_formula(consts, inner));
}

int ProofBuilder::mp(int maj, int min) {
    const JFm& a = formula(maj);
    if (!imp(a) || !eq(a->l, formula(min)))
        throw std::logic_error("modus ponens mismatch: " + to_string(a) + " applied to " + to_string(formula(min)));
    JStep st;
    st.kind = JStep::MP;
    st.maj = maj;
    st.min = min;
    return push(st, a->r);
}

std::optional<int> ProofBuilder::find(const JFm& f) const {
    auto it = index_.find(f);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

JLProof ProofBuilder::extract(int i) const {
    std::vector<char> need(steps_.size(), 0);
    std::vector<int> stack = {i};
    while (!stack.empty()) {
        int k = stack.back();
        stack.pop_back();
        if (need[k]) continue;
        need[k] = 1;
        const JStep& st = steps_[k].first;
        if (st.kind == JStep::MP) {
            stack.push_back(st.maj);
            stack.push_back(st.min);
        }
    }
    std::vector<int> renum(steps_.size(), -1);
    JLProof p;
    p.logic = logic_;
    for (size_t k = 0; k <= size_t(i); ++k) {
        if (!need[k]) continue;
        JStep st = steps_[k].first;
        if (st.kind == JStep::MP) {
            st.maj = renum[st.maj];
            st.min = renum[st.min];
        }
        renum[k] = static_cast<int>(p.steps.size());
        p.steps.push_back(st);
    }
    return p;
}

int ProofBuilder::import(const JLProof& p) {
    std::vector<int> map;
    for (auto& st : p.steps) {
        switch (st.kind) {
            case JStep::Axiom:
                map.push_back(axiom(st.schema, st.formula));
                break;
            case JStep::Can:
                map.push_back(can(st.consts, st.formula));
                break;
            case JStep::MP:
                map.push_back(mp(map.at(st.maj), map.at(st.min)));
                break;
        }
    }
    if (map.empty()) throw std::invalid_argument("empty proof");
    return map.back();
}

int ProofBuilder::subst(const Subst& s, int i) {
    if (s.empty()) return i;
    std::map<int, int> memo;
    std::function<int(int)> go = [&](int k) -> int {
        auto it = memo.find(k);
        if (it != memo.end()) return it->second;
        const JFm f = steps_[k].second;
        JFm g = s.apply(f);
        int r;
        if (g == f || eq(g, f)) {
            r = k;
        } else {
            const JStep st = steps_[k].first;
            switch (st.kind) {
                case JStep::Axiom:
                    r = axiom(st.schema, s.apply(st.formula));
                    break;
                case JStep::Can:
                    r = can(st.consts, s.apply(st.formula));
                    break;
                default: {
                    int a = go(st.maj);
                    int b = go(st.min);
                    r = mp(a, b);
                    break;
                }
            }
        }
        memo[k] = r;
        return r;
    };
    return go(i);
}

std::pair<Tm, int> ProofBuilder::internalise(int i) {
    auto it = internalised_.find(i);
    if (it != internalised_.end()) return it->second;
    const JStep st = steps_[i].first;
    std::pair<Tm, int> res;
    switch (st.kind) {
        case JStep::Axiom: {
            int c = fresh_const();
            res = {cnst(c), can({c}, st.formula)};
            break;
        }
        case JStep::Can: {
            int c = fresh_const();
            std::vector<int> cs = st.consts;
            cs.push_back(c);
            res = {cnst(c), can(cs, st.formula)};
            break;
        }
        case JStep::MP: {
            auto [t2, s2] = internalise(st.maj);
            auto [t1, s1] = internalise(st.min);
            const JFm& maj = formula(st.maj);
            JFm j = jimp(just(t2, maj), jimp(just(t1, maj->l), just(app(t2, t1), maj->r)));
            int ax = axiom(Schema::Jk1, j);
            res = {app(t2, t1), mp(mp(ax, s2), s1)};
            break;
        }
    }
    internalised_[i] = res;
    return res;
}

std::pair<Tm, int> ProofBuilder::lift(int i, const std::vector<Tm>& terms) {
    JFm f = formula(i);
    std::vector<JFm> bs;
    for (size_t k = 0; k < terms.size(); ++k) {
        if (!imp(f)) throw std::logic_error("lift: formula has too few antecedents");
        bs.push_back(f->l);
        f = f->r;
    }
    auto [u, cur] = internalise(i);
    // cur: s1:B1 -> ... -> s_{k}:B_k -> u:(B_{k+1} -> ... -> A)
    for (size_t k = 0; k < terms.size(); ++k) {
        JFm rest = formula(i);
        for (size_t q = 0; q <= k; ++q) rest = rest->r;
        JFm j = jimp(just(u, jimp(bs[k], rest)), jimp(just(terms[k], bs[k]), just(app(u, terms[k]), rest)));
        int ax = axiom(Schema::Jk1, j);
        u = app(u, terms[k]);
        JFm goal = just(u, rest);
        for (size_t q = k + 1; q-- > 0;) goal = jimp(just(terms[q], bs[q]), goal);
        cur = derive(goal, {cur, ax});
    }
    return {u, cur};
}

std::pair<Tm, int> ProofBuilder::lift_sat(int i, const std::vector<Tm>& terms, const Tm& nu) {
    JFm f = formula(i);
    std::vector<JFm> bs;
    for (size_t k = 0; k < terms.size(); ++k) {
        if (!imp(f)) throw std::logic_error("lift_sat: formula has too few antecedents");
        bs.push_back(f->l);
        f = f->r;
    }
    if (!imp(f)) throw std::logic_error("lift_sat: formula has too few antecedents");
    JFm c = f->l, a = f->r;
    auto [t, st] = lift(i, terms);
    JFm j = jimp(just(t, jimp(c, a)), jimp(sat(nu, c), sat(prop(t, nu), a)));
    int ax = axiom(Schema::Jk2, j);
    Tm mu = prop(t, nu);
    JFm goal = jimp(sat(nu, c), sat(mu, a));
    for (size_t q = terms.size(); q-- > 0;) goal = jimp(just(terms[q], bs[q]), goal);
    return {mu, derive(goal, {st, ax})};
}

// ---------------------------------------------------------------------------
// IPL prover: contraction-free sequent search producing combinatory proofs.

namespace {

struct HNode;
using HT = std::shared_ptr<const HNode>;
struct HNode {
    enum Kind { Hyp, Closed, App } kind;
    int id = -1;  // hyp id or builder step
    HT f, a;
    JFm formula;
    std::set<int> free;
};

HT hyp(int id, JFm f) {
    auto n = std::make_shared<HNode>();
    n->kind = HNode::Hyp;
    n->id = id;
    n->formula = std::move(f);
    n->free = {id};
    return n;
}
HT closed(int step, JFm f) {
    auto n = std::make_shared<HNode>();
    n->kind = HNode::Closed;
    n->id = step;
    n->formula = std::move(f);
    return n;
}

class Ipl {
   public:
    Ipl(ProofBuilder& b, int budget) : b_(b), budget_(budget) {}

    HT ax(Schema s, JFm f) { return closed(b_.axiom(s, f), f); }

    HT mp(const HT& f, const HT& a) {
        if (!imp(f->formula) || !eq(f->formula->l, a->formula)) throw std::logic_error("ipl: ill-typed application");
        if (f->free.empty() && a->free.empty() && f->kind == HNode::Closed && a->kind == HNode::Closed) {
            int s = b_.mp(f->id, a->id);
            return closed(s, b_.formula(s));
        }
        auto n = std::make_shared<HNode>();
        n->kind = HNode::App;
        n->f = f;
        n->a = a;
        n->formula = f->formula->r;
        n->free = f->free;
        n->free.insert(a->free.begin(), a->free.end());
        return n;
    }

    HT identity(const JFm& a) {
        JFm aa = jimp(a, a);
        if (auto s = b_.find(aa)) return closed(*s, aa);
        JFm k1 = jimp(a, jimp(aa, a));
        JFm k2 = jimp(a, aa);
        JFm s = jimp(jimp(a, jimp(aa, a)), jimp(jimp(a, aa), aa));
        return mp(mp(ax(Schema::S, s), ax(Schema::K, k1)), ax(Schema::K, k2));
    }

    // [x:A] M
    HT abstract(int x, const JFm& a, const HT& m) {
        std::map<const HNode*, HT> memo;
        return abs_rec(x, a, m, memo);
    }

    HT pair(const HT& x, const HT& y) {
        JFm f = jimp(x->formula, jimp(y->formula, jand(x->formula, y->formula)));
        return mp(mp(ax(Schema::AndI, f), x), y);
    }
    HT fst(const HT& p) { return mp(ax(Schema::AndE1, jimp(p->formula, p->formula->l)), p); }
    HT snd(const HT& p) { return mp(ax(Schema::AndE2, jimp(p->formula, p->formula->r)), p); }
    HT inl(const HT& x, const JFm& other) {
        JFm o = jor(x->formula, other);
        return mp(ax(Schema::OrI1, jimp(x->formula, o)), x);
    }
    HT inr(const HT& x, const JFm& other) {
        JFm o = jor(other, x->formula);
        return mp(ax(Schema::OrI2, jimp(x->formula, o)), x);
    }
    HT abort(const HT& bot, const JFm& goal) { return mp(ax(Schema::BotE, jimp(jbot(), goal)), bot); }
    HT weaken(const HT& x, const JFm& a) {  // a -> x
        return mp(ax(Schema::K, jimp(x->formula, jimp(a, x->formula))), x);
    }

    int fresh_hyp() { return next_hyp_++; }

    struct Entry {
        JFm f;
        HT pf;
    };
    using Ctx = std::vector<Entry>;

    std::optional<HT> prove(Ctx ctx, const JFm& goal) {
        if (++nodes_ > budget_) throw GlueBudgetExceeded("propositional search budget exhausted");
        for (auto& e : ctx)
            if (eq(e.f, goal)) return e.pf;
        for (auto& e : ctx)
            if (is(e.f, JOp::Bot)) return abort(e.pf, goal);

        // Invertible left rules without branching.
        for (size_t i = 0; i < ctx.size(); ++i) {
            const JFm f = ctx[i].f;
            const HT pf = ctx[i].pf;
            if (is(f, JOp::And)) {
                Ctx c = without(ctx, i);
                add(c, f->l, fst(pf));
                add(c, f->r, snd(pf));
                return prove(c, goal);
            }
            if (!imp(f)) continue;
            const JFm& a = f->l;
            if (is(a, JOp::Bot)) return prove(without(ctx, i), goal);
            if (is(a, JOp::And)) {
                // (C & D) -> B  ~>  C -> D -> B
                int c = fresh_hyp(), d = fresh_hyp();
                HT hc = hyp(c, a->l), hd = hyp(d, a->r);
                HT body = mp(pf, pair(hc, hd));
                HT curried = abstract(c, a->l, abstract(d, a->r, body));
                Ctx cx = without(ctx, i);
                add(cx, curried->formula, curried);
                return prove(cx, goal);
            }
            if (is(a, JOp::Or)) {
                int c = fresh_hyp(), d = fresh_hyp();
                HT l = abstract(c, a->l, mp(pf, inl(hyp(c, a->l), a->r)));
                HT r = abstract(d, a->r, mp(pf, inr(hyp(d, a->r), a->l)));
                Ctx cx = without(ctx, i);
                add(cx, l->formula, l);
                add(cx, r->formula, r);
                return prove(cx, goal);
            }
            for (size_t j = 0; j < ctx.size(); ++j) {
                if (j != i && eq(ctx[j].f, a)) {
                    Ctx cx = without(ctx, i);
                    add(cx, f->r, mp(pf, ctx[j].pf));
                    return prove(cx, goal);
                }
            }
        }
        // Invertible right rules.
        if (imp(goal)) {
            int y = fresh_hyp();
            Ctx cx = ctx;
            add(cx, goal->l, hyp(y, goal->l));
            auto m = prove(cx, goal->r);
            if (!m) return std::nullopt;
            return abstract(y, goal->l, *m);
        }
        if (is(goal, JOp::And)) {
            auto l = prove(ctx, goal->l);
            if (!l) return std::nullopt;
            auto r = prove(ctx, goal->r);
            if (!r) return std::nullopt;
            return pair(*l, *r);
        }
        // Left disjunction.
        for (size_t i = 0; i < ctx.size(); ++i) {
            const JFm f = ctx[i].f;
            if (!is(f, JOp::Or)) continue;
            int y = fresh_hyp(), z = fresh_hyp();
            Ctx l = without(ctx, i), r = l;
            add(l, f->l, hyp(y, f->l));
            add(r, f->r, hyp(z, f->r));
            auto p = prove(l, goal);
            if (!p) return std::nullopt;
            auto q = prove(r, goal);
            if (!q) return std::nullopt;
            HT pl = abstract(y, f->l, *p), ql = abstract(z, f->r, *q);
            JFm oe = jimp(pl->formula, jimp(ql->formula, jimp(f, goal)));
            return mp(mp(mp(ax(Schema::OrE, oe), pl), ql), ctx[i].pf);
        }
        // Non-invertible choices.
        if (is(goal, JOp::Or)) {
            if (auto l = prove(ctx, goal->l)) return inl(*l, goal->r);
            if (auto r = prove(ctx, goal->r)) return inr(*r, goal->l);
        }
        for (size_t i = 0; i < ctx.size(); ++i) {
            const JFm f = ctx[i].f;
            if (!imp(f) || !imp(f->l)) continue;
            // (C -> D) -> B:  from  D -> B, C |- D  and  B |- goal.
            const JFm c = f->l->l, d = f->l->r, b = f->r;
            const HT pf = ctx[i].pf;
            int hd = fresh_hyp();
            HT w = abstract(hd, d, mp(pf, weaken(hyp(hd, d), c)));
            Ctx left = without(ctx, i);
            int hc = fresh_hyp();
            add(left, w->formula, w);
            add(left, c, hyp(hc, c));
            auto m = prove(left, d);
            if (!m) continue;
            HT cd = abstract(hc, c, *m);
            Ctx right = without(ctx, i);
            add(right, b, mp(pf, cd));
            if (auto r = prove(right, goal)) return r;
        }
        return std::nullopt;
    }

    int emit(const HT& t) {
        if (!t->free.empty()) throw std::logic_error("ipl: emitting an open term");
        std::map<const HNode*, int> memo;
        return emit_rec(t, memo);
    }

   private:
    static Ctx without(const Ctx& c, size_t i) {
        Ctx out = c;
        out.erase(out.begin() + i);
        return out;
    }
    static void add(Ctx& c, const JFm& f, const HT& pf) {
        for (auto& e : c)
            if (eq(e.f, f)) return;
        c.push_back({f, pf});
    }

    HT abs_rec(int x, const JFm& a, const HT& m, std::map<const HNode*, HT>& memo) {
        auto it = memo.find(m.get());
        if (it != memo.end()) return it->second;
        HT r;
        if (!m->free.count(x)) {
            r = weaken(m, a);
        } else if (m->kind == HNode::Hyp) {
            r = identity(a);
        } else if (m->a->kind == HNode::Hyp && m->a->id == x && !m->f->free.count(x)) {
            r = m->f;
        } else {
            HT p = abs_rec(x, a, m->f, memo);
            HT q = abs_rec(x, a, m->a, memo);
            const JFm& cb = m->f->formula;  // C -> B
            JFm s = jimp(jimp(a, cb), jimp(jimp(a, cb->l), jimp(a, cb->r)));
            r = mp(mp(ax(Schema::S, s), p), q);
        }
        memo[m.get()] = r;
        return r;
    }

    int emit_rec(const HT& t, std::map<const HNode*, int>& memo) {
        if (t->kind == HNode::Closed) return t->id;
        auto it = memo.find(t.get());
        if (it != memo.end()) return it->second;
        int f = emit_rec(t->f, memo);
        int a = emit_rec(t->a, memo);
        int r = b_.mp(f, a);
        memo[t.get()] = r;
        return r;
    }

    ProofBuilder& b_;
    int budget_;
    int nodes_ = 0;
    int next_hyp_ = 0;
};

}  // namespace

int ProofBuilder::derive(const JFm& goal, const std::vector<int>& lemmas) {
    if (auto s = find(goal)) return *s;
    Ipl ipl(*this, glue_budget_);
    Ipl::Ctx ctx;
    for (int l : lemmas) ctx.push_back({formula(l), closed(l, formula(l))});
    auto r = ipl.prove(ctx, goal);
    if (!r) throw GlueBudgetExceeded("no propositional derivation of " + to_string(goal));
    return ipl.emit(*r);
}

std::pair<Tm, JLProof> internalise(const JLProof& p) {
    ProofBuilder b(p.logic);
    auto [t, q] = b.internalise(b.import(p));
    return {t, b.extract(q)};
}

std::pair<Tm, JLProof> lift(const JLProof& p, const std::vector<Tm>& terms) {
    ProofBuilder b(p.logic);
    auto [t, q] = b.lift(b.import(p), terms);
    return {t, b.extract(q)};
}

std::pair<Tm, JLProof> lift_sat(const JLProof& p, const std::vector<Tm>& terms, const Tm& nu) {
    ProofBuilder b(p.logic);
    auto [t, q] = b.lift_sat(b.import(p), terms, nu);
    return {t, b.extract(q)};
}

std::optional<JLProof> prove_ipl(const JFm& goal, Logic l, int budget) {
    ProofBuilder b(l, budget);
    try {
        int s = b.derive(goal);
        return b.extract(s);
    } catch (const GlueBudgetExceeded&) {
        return std::nullopt;
    }
}

}  // namespace jreal
