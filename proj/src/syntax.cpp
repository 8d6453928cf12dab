#include "jreal/syntax.hpp"

#include <functional>

namespace jreal {

namespace {
Fm mk(Op op, Fm l = nullptr, Fm r = nullptr, int idx = -1, std::string name = {}) {
    auto f = std::make_shared<Formula>();
    f->op = op;
    f->l = std::move(l);
    f->r = std::move(r);
    f->idx = idx;
    f->name = std::move(name);
    return f;
}
Tm mkt(TOp op, int n, Tm a = nullptr, Tm b = nullptr) {
    auto t = std::make_shared<Term>();
    t->op = op;
    t->n = n;
    t->a = std::move(a);
    t->b = std::move(b);
    return t;
}
JFm mkj(JOp op, JFm l = nullptr, JFm r = nullptr, Tm t = nullptr, std::string name = {}) {
    auto f = std::make_shared<JFormula>();
    f->op = op;
    f->l = std::move(l);
    f->r = std::move(r);
    f->t = std::move(t);
    f->name = std::move(name);
    return f;
}
int cmp_int(int a, int b) { return a < b ? -1 : (a > b ? 1 : 0); }
}  // namespace

Fm mk_bot() {
    static Fm b = mk(Op::Bot);
    return b;
}
Fm mk_atom(const std::string& name) { return mk(Op::Atom, nullptr, nullptr, -1, name); }
Fm mk_and(Fm a, Fm b) { return mk(Op::And, std::move(a), std::move(b)); }
Fm mk_or(Fm a, Fm b) { return mk(Op::Or, std::move(a), std::move(b)); }
Fm mk_imp(Fm a, Fm b) { return mk(Op::Imp, std::move(a), std::move(b)); }
Fm mk_box(Fm a, int idx) { return mk(Op::Box, std::move(a), nullptr, idx); }
Fm mk_dia(Fm a, int idx) { return mk(Op::Dia, std::move(a), nullptr, idx); }
Fm mk_top() { return mk_imp(mk_bot(), mk_bot()); }

int compare(const Fm& a, const Fm& b, bool with_idx) {
    if (a == b) return 0;
    if (a->op != b->op) return cmp_int(int(a->op), int(b->op));
    switch (a->op) {
        case Op::Bot:
            return 0;
        case Op::Atom:
            return a->name.compare(b->name) < 0 ? -1 : (a->name == b->name ? 0 : 1);
        case Op::Box:
        case Op::Dia: {
            int c = compare(a->l, b->l, with_idx);
            if (c) return c;
            return with_idx ? cmp_int(a->idx, b->idx) : 0;
        }
        default: {
            int c = compare(a->l, b->l, with_idx);
            if (c) return c;
            return compare(a->r, b->r, with_idx);
        }
    }
}

namespace {
int prec(Op op) {
    switch (op) {
        case Op::Imp:
            return 1;
        case Op::Or:
            return 2;
        case Op::And:
            return 3;
        default:
            return 4;
    }
}
int jprec(JOp op) {
    switch (op) {
        case JOp::Imp:
            return 1;
        case JOp::Or:
            return 2;
        case JOp::And:
            return 3;
        default:
            return 4;
    }
}
std::string paren(const std::string& s, bool p) { return p ? "(" + s + ")" : s; }

// Shared printer for binary connectives; unary handled by the caller.
template <class Node, class OpT, class PrecFn, class Rec>
std::string print_binary(const Node& f, OpT op, PrecFn pr, Rec rec, const char* sym, bool right_assoc) {
    int p = pr(op);
    bool lp = right_assoc ? pr(f->l->op) <= p : pr(f->l->op) < p;
    bool rp = right_assoc ? pr(f->r->op) < p : pr(f->r->op) <= p;
    return paren(rec(f->l), lp) + sym + paren(rec(f->r), rp);
}
}  // namespace

std::string to_string(const Fm& f) {
    switch (f->op) {
        case Op::Bot:
            return "#";
        case Op::Atom:
            return f->name;
        case Op::And:
            return print_binary(f, f->op, prec, [](const Fm& g) { return to_string(g); }, " & ", false);
        case Op::Or:
            return print_binary(f, f->op, prec, [](const Fm& g) { return to_string(g); }, " | ", false);
        case Op::Imp:
            return print_binary(f, f->op, prec, [](const Fm& g) { return to_string(g); }, " -> ", true);
        case Op::Box:
        case Op::Dia: {
            std::string head;
            if (f->idx < 0)
                head = f->op == Op::Box ? "[]" : "<>";
            else
                head = f->op == Op::Box ? "[" + std::to_string(f->idx) + "]" : "<" + std::to_string(f->idx) + ">";
            return head + paren(to_string(f->l), prec(f->l->op) < 4);
        }
    }
    return "?";
}

Tm pvar(int n) { return mkt(TOp::PVar, n); }
Tm rpvar(int n) { return mkt(TOp::RPVar, n); }
Tm cnst(int n) { return mkt(TOp::Const, n); }
Tm sum(Tm s, Tm t) { return mkt(TOp::Sum, 0, std::move(s), std::move(t)); }
Tm app(Tm s, Tm t) { return mkt(TOp::App, 0, std::move(s), std::move(t)); }
Tm bang(Tm t) { return mkt(TOp::Bang, 0, std::move(t)); }
Tm update(Tm mu, Tm t) { return mkt(TOp::Update, 0, std::move(mu), std::move(t)); }
Tm svar(int n) { return mkt(TOp::SVar, n); }
Tm rsvar(int n) { return mkt(TOp::RSVar, n); }
Tm uni(Tm mu, Tm nu) { return mkt(TOp::Union, 0, std::move(mu), std::move(nu)); }
Tm prop(Tm t, Tm mu) { return mkt(TOp::Prop, 0, std::move(t), std::move(mu)); }

int compare(const Tm& a, const Tm& b) {
    if (a == b) return 0;
    if (a->op != b->op) return cmp_int(int(a->op), int(b->op));
    if (a->n != b->n) return cmp_int(a->n, b->n);
    if (a->a || b->a) {
        int c = compare(a->a, b->a);
        if (c) return c;
    }
    if (a->b || b->b) return compare(a->b, b->b);
    return 0;
}

bool ground(const Tm& t) {
    switch (t->op) {
        case TOp::PVar:
        case TOp::RPVar:
        case TOp::SVar:
        case TOp::RSVar:
            return false;
        case TOp::Const:
            return true;
        case TOp::Bang:
            return ground(t->a);
        default:
            return ground(t->a) && ground(t->b);
    }
}

namespace {
int tprec(TOp op) {
    switch (op) {
        case TOp::Sum:
        case TOp::Union:
            return 1;
        case TOp::Update:
            return 2;
        case TOp::App:
        case TOp::Prop:
            return 3;
        case TOp::Bang:
            return 4;
        default:
            return 5;
    }
}
}  // namespace

std::string to_string(const Tm& t) {
    auto bin = [&](const char* sym, bool right_assoc) {
        int p = tprec(t->op);
        bool lp = right_assoc ? tprec(t->a->op) <= p : tprec(t->a->op) < p;
        bool rp = right_assoc ? tprec(t->b->op) < p : tprec(t->b->op) <= p;
        return paren(to_string(t->a), lp) + sym + paren(to_string(t->b), rp);
    };
    switch (t->op) {
        case TOp::PVar:
            return "x" + std::to_string(t->n);
        case TOp::RPVar:
            return "y^" + std::to_string(t->n);
        case TOp::Const:
            return "c" + std::to_string(t->n);
        case TOp::SVar:
            return "a" + std::to_string(t->n);
        case TOp::RSVar:
            return "a^" + std::to_string(t->n);
        case TOp::Sum:
            return bin("+", false);
        case TOp::Union:
            return bin(" U ", false);
        case TOp::App:
            return bin("*", false);
        case TOp::Prop:
            return bin("@", false);
        case TOp::Update:
            return bin("|>", true);
        case TOp::Bang:
            return "!" + paren(to_string(t->a), tprec(t->a->op) < 4);
    }
    return "?";
}

std::string to_string(const Var& v) {
    switch (v.kind) {
        case 'x':
            return "x" + std::to_string(v.n);
        case 'a':
            return "a" + std::to_string(v.n);
        case 'y':
            return "y^" + std::to_string(v.n);
        default:
            return "a^" + std::to_string(v.n);
    }
}

void collect_vars(const Tm& t, std::set<Var>& out) {
    switch (t->op) {
        case TOp::PVar:
            out.insert({'x', t->n});
            return;
        case TOp::SVar:
            out.insert({'a', t->n});
            return;
        case TOp::RPVar:
            out.insert({'y', t->n});
            return;
        case TOp::RSVar:
            out.insert({'b', t->n});
            return;
        case TOp::Const:
            return;
        default:
            if (t->a) collect_vars(t->a, out);
            if (t->b) collect_vars(t->b, out);
    }
}

JFm jbot() {
    static JFm b = mkj(JOp::Bot);
    return b;
}
JFm jatom(const std::string& name) { return mkj(JOp::Atom, nullptr, nullptr, nullptr, name); }
JFm jand(JFm a, JFm b) { return mkj(JOp::And, std::move(a), std::move(b)); }
JFm jor(JFm a, JFm b) { return mkj(JOp::Or, std::move(a), std::move(b)); }
JFm jimp(JFm a, JFm b) { return mkj(JOp::Imp, std::move(a), std::move(b)); }
JFm just(Tm t, JFm a) {
    if (t->is_sat()) throw std::invalid_argument("justification needs a proof term");
    return mkj(JOp::Just, std::move(a), nullptr, std::move(t));
}
JFm sat(Tm mu, JFm a) {
    if (!mu->is_sat()) throw std::invalid_argument("satisfier formula needs a satisfier");
    return mkj(JOp::Sat, std::move(a), nullptr, std::move(mu));
}
JFm jtop() { return jimp(jbot(), jbot()); }

int compare(const JFm& a, const JFm& b) {
    if (a == b) return 0;
    if (a->op != b->op) return cmp_int(int(a->op), int(b->op));
    switch (a->op) {
        case JOp::Bot:
            return 0;
        case JOp::Atom:
            return a->name.compare(b->name) < 0 ? -1 : (a->name == b->name ? 0 : 1);
        case JOp::Just:
        case JOp::Sat: {
            int c = compare(a->t, b->t);
            if (c) return c;
            return compare(a->l, b->l);
        }
        default: {
            int c = compare(a->l, b->l);
            if (c) return c;
            return compare(a->r, b->r);
        }
    }
}

std::string to_string(const JFm& f) {
    auto rec = [](const JFm& g) { return to_string(g); };
    switch (f->op) {
        case JOp::Bot:
            return "#";
        case JOp::Atom:
            return f->name;
        case JOp::And:
            return print_binary(f, f->op, jprec, rec, " & ", false);
        case JOp::Or:
            return print_binary(f, f->op, jprec, rec, " | ", false);
        case JOp::Imp:
            return print_binary(f, f->op, jprec, rec, " -> ", true);
        case JOp::Just:
        case JOp::Sat: {
            std::string ts = to_string(f->t);
            bool tp = tprec(f->t->op) < 5;
            return paren(ts, tp) + ":" + paren(to_string(f->l), jprec(f->l->op) < 4);
        }
    }
    return "?";
}

std::set<Var> vars(const JFm& f) {
    std::set<Var> out;
    std::function<void(const JFm&)> go = [&](const JFm& g) {
        if (g->t) collect_vars(g->t, out);
        if (g->l) go(g->l);
        if (g->r) go(g->r);
    };
    go(f);
    return out;
}

Tm Subst::apply(const Tm& t) const {
    if (m.empty()) return t;
    switch (t->op) {
        case TOp::PVar:
        case TOp::SVar:
        case TOp::RPVar:
        case TOp::RSVar: {
            char k = t->op == TOp::PVar ? 'x' : t->op == TOp::SVar ? 'a' : t->op == TOp::RPVar ? 'y' : 'b';
            auto it = m.find({k, t->n});
            return it == m.end() ? t : it->second;
        }
        case TOp::Const:
            return t;
        default: {
            Tm a = t->a ? apply(t->a) : nullptr;
            Tm b = t->b ? apply(t->b) : nullptr;
            if (a == t->a && b == t->b) return t;
            return mkt(t->op, t->n, a, b);
        }
    }
}

JFm Subst::apply(const JFm& f) const {
    if (m.empty()) return f;
    switch (f->op) {
        case JOp::Bot:
        case JOp::Atom:
            return f;
        case JOp::Just:
        case JOp::Sat: {
            Tm t = apply(f->t);
            JFm l = apply(f->l);
            if (t == f->t && l == f->l) return f;
            return mkj(f->op, l, nullptr, t);
        }
        default: {
            JFm l = apply(f->l), r = apply(f->r);
            if (l == f->l && r == f->r) return f;
            return mkj(f->op, l, r);
        }
    }
}

std::set<Var> Subst::dom() const {
    std::set<Var> d;
    for (auto& [v, t] : m) {
        std::set<Var> only;
        collect_vars(t, only);
        bool id = (t->op == TOp::PVar || t->op == TOp::SVar || t->op == TOp::RPVar || t->op == TOp::RSVar) &&
                  only.size() == 1 && *only.begin() == v;
        if (!id) d.insert(v);
    }
    return d;
}

Subst Subst::after(const Subst& other) const {
    Subst res;
    for (auto& [v, t] : other.m) res.m[v] = apply(t);
    for (auto& [v, t] : m)
        if (!other.m.count(v)) res.m[v] = t;
    for (auto it = res.m.begin(); it != res.m.end();) {
        const Tm& t = it->second;
        bool id = (it->first.kind == 'x' && t->op == TOp::PVar && t->n == it->first.n) ||
                  (it->first.kind == 'a' && t->op == TOp::SVar && t->n == it->first.n);
        it = id ? res.m.erase(it) : std::next(it);
    }
    return res;
}

Fm subformula_at(const Fm& f, const std::vector<int>& path) {
    Fm cur = f;
    for (int c : path) {
        if (c == 0 && cur->l)
            cur = cur->l;
        else if (c == 1 && cur->r)
            cur = cur->r;
        else
            throw PathError("invalid path into formula");
    }
    return cur;
}

Polarity polarity_at(const Fm& f, const std::vector<int>& path) {
    Fm cur = f;
    bool pos = true;
    for (int c : path) {
        if (c == 0 && cur->l) {
            if (cur->op == Op::Imp) pos = !pos;
            cur = cur->l;
        } else if (c == 1 && cur->r) {
            cur = cur->r;
        } else {
            throw PathError("invalid path into formula");
        }
    }
    return pos ? Polarity::Positive : Polarity::Negative;
}

int Counter::fresh(int residue) {
    int n = base_;
    while (n % 4 != residue) ++n;
    while (used_.count(n)) n += 4;
    used_.insert(n);
    return n;
}

Fm properly_annotate(const Fm& f, Counter& c, bool positive) {
    switch (f->op) {
        case Op::Bot:
        case Op::Atom:
            return f;
        case Op::Box: {
            int i = c.fresh(positive ? 0 : 1);
            return mk_box(properly_annotate(f->l, c, positive), i);
        }
        case Op::Dia: {
            int i = c.fresh(positive ? 2 : 3);
            return mk_dia(properly_annotate(f->l, c, positive), i);
        }
        case Op::Imp: {
            Fm l = properly_annotate(f->l, c, !positive);
            return mk_imp(l, properly_annotate(f->r, c, positive));
        }
        default: {
            Fm l = properly_annotate(f->l, c, positive);
            Fm r = properly_annotate(f->r, c, positive);
            return mk(f->op, l, r);
        }
    }
}

Fm properly_annotate(const Fm& f, int seed) {
    Counter c(seed);
    return properly_annotate(f, c, true);
}

Fm erase(const Fm& f) {
    switch (f->op) {
        case Op::Bot:
        case Op::Atom:
            return f;
        case Op::Box:
            return mk_box(erase(f->l));
        case Op::Dia:
            return mk_dia(erase(f->l));
        default:
            return mk(f->op, erase(f->l), erase(f->r));
    }
}

bool is_annotated(const Fm& f) {
    switch (f->op) {
        case Op::Bot:
        case Op::Atom:
            return true;
        case Op::Box:
        case Op::Dia:
            return f->idx >= 0 && is_annotated(f->l);
        default:
            return is_annotated(f->l) && is_annotated(f->r);
    }
}

bool properly_annotated(const Fm& f, bool positive, std::string* why) {
    std::set<int> seen;
    std::function<bool(const Fm&, bool)> go = [&](const Fm& g, bool pos) -> bool {
        switch (g->op) {
            case Op::Bot:
            case Op::Atom:
                return true;
            case Op::Box:
            case Op::Dia: {
                int want = g->op == Op::Box ? (pos ? 0 : 1) : (pos ? 2 : 3);
                if (g->idx < 0 || g->idx % 4 != want) {
                    if (why) *why = "bad index at " + to_string(g);
                    return false;
                }
                if (!seen.insert(g->idx).second) {
                    if (why) *why = "repeated index " + std::to_string(g->idx);
                    return false;
                }
                return go(g->l, pos);
            }
            case Op::Imp:
                return go(g->l, !pos) && go(g->r, pos);
            default:
                return go(g->l, pos) && go(g->r, pos);
        }
    };
    return go(f, positive);
}

std::set<int> ann(const Fm& f) {
    std::set<int> out;
    std::function<void(const Fm&)> go = [&](const Fm& g) {
        if (g->idx >= 0) out.insert(g->idx);
        if (g->l) go(g->l);
        if (g->r) go(g->r);
    };
    go(f);
    return out;
}

std::set<Var> negvar_of(const std::set<int>& idx) {
    std::set<Var> out;
    for (int i : idx) {
        if (i % 4 == 1) out.insert({'x', i / 4});
        if (i % 4 == 3) out.insert({'a', i / 4});
    }
    return out;
}

std::set<Var> negvar(const Fm& f) { return negvar_of(ann(f)); }

Fm forget_modal(const JFm& f) {
    switch (f->op) {
        case JOp::Bot:
            return mk_bot();
        case JOp::Atom:
            return mk_atom(f->name);
        case JOp::And:
            return mk_and(forget_modal(f->l), forget_modal(f->r));
        case JOp::Or:
            return mk_or(forget_modal(f->l), forget_modal(f->r));
        case JOp::Imp:
            return mk_imp(forget_modal(f->l), forget_modal(f->r));
        case JOp::Just:
            return mk_box(forget_modal(f->l));
        case JOp::Sat:
            return mk_dia(forget_modal(f->l));
    }
    return nullptr;
}

Tm forced_var(int idx) {
    if (idx % 4 == 1) return pvar(idx / 4);
    if (idx % 4 == 3) return svar(idx / 4);
    return nullptr;
}

Tm recipe_term(int idx) {
    switch (idx % 4) {
        case 0:
            return rpvar(idx / 4);
        case 1:
            return pvar(idx / 4);
        case 2:
            return rsvar(idx / 4);
        default:
            return svar(idx / 4);
    }
}

bool residue_ok(int idx, const Tm& t) {
    switch (idx % 4) {
        case 0:
            return !t->is_sat();
        case 2:
            return t->is_sat();
        default:
            return equal(t, forced_var(idx));
    }
}

JFm apply_realisation(const Realisation& r, const Fm& f) {
    switch (f->op) {
        case Op::Bot:
            return jbot();
        case Op::Atom:
            return jatom(f->name);
        case Op::And:
            return jand(apply_realisation(r, f->l), apply_realisation(r, f->r));
        case Op::Or:
            return jor(apply_realisation(r, f->l), apply_realisation(r, f->r));
        case Op::Imp:
            return jimp(apply_realisation(r, f->l), apply_realisation(r, f->r));
        case Op::Box:
        case Op::Dia: {
            auto it = r.find(f->idx);
            if (f->idx < 0 || it == r.end())
                throw RealisationError(RealisationError::MissingIndex, f->idx,
                                       "realisation undefined at index " + std::to_string(f->idx));
            bool want_box = f->idx % 4 < 2;
            if ((f->op == Op::Box) != want_box || !residue_ok(f->idx, it->second))
                throw RealisationError(RealisationError::ResidueMismatch, f->idx,
                                       "residue mismatch at index " + std::to_string(f->idx));
            JFm body = apply_realisation(r, f->l);
            if (f->idx % 4 == 3) {
                auto vs = vars(body);
                if (vs.count({'a', f->idx / 4}))
                    throw RealisationError(RealisationError::SelfReferentialSatisfier, f->idx / 4,
                                           "satisfier a" + std::to_string(f->idx / 4) + " occurs in its own body");
            }
            return f->op == Op::Box ? just(it->second, body) : sat(it->second, body);
        }
    }
    return nullptr;
}

bool normal_realisation(const Realisation& r, const Fm& f, std::string* why) {
    std::set<Var> seen;
    std::function<bool(const Fm&, bool)> go = [&](const Fm& g, bool pos) -> bool {
        switch (g->op) {
            case Op::Bot:
            case Op::Atom:
                return true;
            case Op::Imp:
                return go(g->l, !pos) && go(g->r, pos);
            case Op::And:
            case Op::Or:
                return go(g->l, pos) && go(g->r, pos);
            default: {
                if (!pos) {
                    auto it = r.find(g->idx);
                    if (it == r.end()) {
                        if (why) *why = "missing index " + std::to_string(g->idx);
                        return false;
                    }
                    const Tm& t = it->second;
                    if (t->op != TOp::PVar && t->op != TOp::SVar) {
                        if (why) *why = "negative index " + std::to_string(g->idx) + " not realised by a variable";
                        return false;
                    }
                    Var v{t->op == TOp::PVar ? 'x' : 'a', t->n};
                    if (!seen.insert(v).second) {
                        if (why) *why = "variable " + to_string(v) + " reused";
                        return false;
                    }
                }
                return go(g->l, pos);
            }
        }
    };
    return go(f, true);
}

}  // namespace jreal
