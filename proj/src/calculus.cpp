#include "jreal/calculus.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace jreal {

std::string logic_name(Logic l) {
    switch (l) {
        case Logic::IK:
            return "ik";
        case Logic::IKt:
            return "ikt";
        case Logic::IK4:
            return "ik4";
        case Logic::IS4:
            return "is4";
    }
    return "?";
}

Logic logic_from_name(const std::string& s) {
    if (s == "ik") return Logic::IK;
    if (s == "ikt") return Logic::IKt;
    if (s == "ik4") return Logic::IK4;
    if (s == "is4") return Logic::IS4;
    throw std::invalid_argument("unknown logic '" + s + "'");
}

namespace {
const std::vector<std::pair<Rule, const char*>> kRuleNames = {
    {Rule::BotL, "bot_l"},       {Rule::Id, "id"},           {Rule::Contr, "contr"},
    {Rule::AndL, "and_l"},       {Rule::AndR, "and_r"},      {Rule::OrL, "or_l"},
    {Rule::OrR1, "or_r1"},       {Rule::OrR2, "or_r2"},      {Rule::ImpL, "imp_l"},
    {Rule::ImpLS, "imp_l_s"},    {Rule::ImpR, "imp_r"},      {Rule::BoxLBr, "box_l_br"},
    {Rule::BoxLDia, "box_l_dia"}, {Rule::BoxR, "box_r"},     {Rule::DiaL, "dia_l"},
    {Rule::DiaR, "dia_r"},       {Rule::TL, "t_l"},          {Rule::TR, "t_r"},
    {Rule::FourLBr, "four_l_br"}, {Rule::FourLDia, "four_l_dia"}, {Rule::FourR, "four_r"},
    {Rule::Upd, "upd"},
};
}  // namespace

std::string rule_name(Rule r) {
    for (auto& [k, n] : kRuleNames)
        if (k == r) return n;
    return "?";
}

Rule rule_from_name(const std::string& s) {
    for (auto& [k, n] : kRuleNames)
        if (s == n) return k;
    throw std::invalid_argument("unknown rule '" + s + "'");
}

bool rule_in_logic(Rule r, Logic l) {
    switch (r) {
        case Rule::TL:
        case Rule::TR:
            return has_t(l);
        case Rule::FourLBr:
        case Rule::FourLDia:
        case Rule::FourR:
            return has_4(l);
        default:
            return true;
    }
}

namespace {

[[noreturn]] void not_applicable(Rule r, const std::string& why) {
    throw RuleError(RuleError::NotApplicable, rule_name(r) + ": " + why);
}

Fm renumber(const Fm& f, Counter* c, std::map<int, int>& m) {
    switch (f->op) {
        case Op::Bot:
        case Op::Atom:
            return f;
        case Op::Box:
        case Op::Dia: {
            int n = -1;
            if (f->idx >= 0 && c) {
                n = c->fresh(f->idx % 4);
                m[f->idx] = n;
            }
            Fm body = renumber(f->l, c, m);
            return f->op == Op::Box ? mk_box(body, n) : mk_dia(body, n);
        }
        case Op::And:
            return mk_and(renumber(f->l, c, m), renumber(f->r, c, m));
        case Op::Or:
            return mk_or(renumber(f->l, c, m), renumber(f->r, c, m));
        case Op::Imp:
            return mk_imp(renumber(f->l, c, m), renumber(f->r, c, m));
    }
    return f;
}

LItem renumber(const LItem& i, Counter* c, std::map<int, int>& m) {
    if (!i.is_bracket()) return in(renumber(i.f, c, m));
    int n = -1;
    if (i.idx >= 0 && c) {
        n = c->fresh(3);
        m[i.idx] = n;
    }
    Lhs body;
    for (auto& j : i.body) body.push_back(renumber(j, c, m));
    return dia_br(body, n);
}

}  // namespace

bool is_annotated(const Sequent& s) {
    Fm f = fm(s);
    if (ann(f).empty()) return false;
    if (!is_annotated(f)) throw std::invalid_argument("sequent is only partially annotated");
    return true;
}

Expansion apply_rule_backward(const Sequent& s, Rule rule, const Position& pos, Counter* counter) {
    Fm whole = fm(s);
    bool annotated = !ann(whole).empty();
    if (annotated && !is_annotated(whole)) throw std::invalid_argument("sequent is only partially annotated");
    Counter local(0);
    if (annotated && !counter) {
        local.reserve_all(ann(s));
        counter = &local;
    }
    Counter* fc = annotated ? counter : nullptr;

    LevelView v;
    try {
        v = level_at(s, pos.path);
    } catch (const PositionError& e) {
        not_applicable(rule, e.what());
    }
    const Lhs& lhs = *v.lhs;
    const RItem* rhs = v.rhs;
    const auto& it = pos.items;
    int nl = static_cast<int>(lhs.size());
    auto need = [&](bool c, const char* why) {
        if (!c) not_applicable(rule, why);
    };
    auto lformula = [&](size_t k, Op op) -> Fm {
        need(it.size() > k, "missing item");
        int i = it[k];
        need(i >= 0 && i < nl && !lhs[i].is_bracket(), "item is not an input formula");
        need(lhs[i].f->op == op, "principal has the wrong connective");
        return lhs[i].f;
    };
    auto rformula = [&](Op op) -> Fm {
        need(rhs != nullptr, "rule needs an output level");
        need(!rhs->is_bracket() && rhs->f->op == op, "output formula has the wrong connective");
        return rhs->f;
    };
    auto one_item = [&](size_t n) { need(it.size() == n, "wrong number of items"); };
    auto diabr_item = [&](size_t k) -> int {
        need(it.size() > k, "missing item");
        int i = it[k];
        need(i >= 0 && i < nl && lhs[i].is_bracket(), "item is not a diamond bracket");
        return i;
    };
    auto replace = [&](int i, std::vector<LItem> with) {
        return edit_level(s, pos.path, [&](Lhs& l, RItem*) {
            l.erase(l.begin() + i);
            l.insert(l.end(), with.begin(), with.end());
        });
    };
    auto set_rhs = [&](RItem r, std::vector<LItem> add = {}) {
        return edit_level(s, pos.path, [&](Lhs& l, RItem* rr) {
            l.insert(l.end(), add.begin(), add.end());
            *rr = std::move(r);
        });
    };

    Expansion e;
    switch (rule) {
        case Rule::BotL:
            one_item(1);
            lformula(0, Op::Bot);
            return e;
        case Rule::Id: {
            one_item(1);
            Fm p = lformula(0, Op::Atom);
            Fm q = rformula(Op::Atom);
            need(p->name == q->name, "atoms differ");
            return e;
        }
        case Rule::Contr: {
            need(!it.empty(), "nothing to contract");
            std::vector<int> idx = it;
            std::sort(idx.begin(), idx.end());
            need(std::adjacent_find(idx.begin(), idx.end()) == idx.end(), "repeated item");
            need(idx.front() >= 0 && idx.back() < nl, "item out of range");
            e.copies.resize(2);
            std::vector<LItem> c1, c2;
            for (int i : idx) {
                c1.push_back(renumber(lhs[i], fc, e.copies[0]));
            }
            for (int i : idx) c2.push_back(renumber(lhs[i], fc, e.copies[1]));
            if (!annotated) e.copies = {{}, {}};
            e.premises.push_back(edit_level(s, pos.path, [&](Lhs& l, RItem*) {
                for (auto k = idx.rbegin(); k != idx.rend(); ++k) l.erase(l.begin() + *k);
                l.insert(l.end(), c1.begin(), c1.end());
                l.insert(l.end(), c2.begin(), c2.end());
            }));
            return e;
        }
        case Rule::AndL: {
            one_item(1);
            Fm f = lformula(0, Op::And);
            e.premises.push_back(replace(it[0], {in(f->l), in(f->r)}));
            return e;
        }
        case Rule::AndR: {
            one_item(1);
            need(it[0] == nl, "principal must be the output");
            Fm f = rformula(Op::And);
            e.premises.push_back(set_rhs(out(f->l)));
            e.premises.push_back(set_rhs(out(f->r)));
            return e;
        }
        case Rule::OrL: {
            one_item(1);
            Fm f = lformula(0, Op::Or);
            e.premises.push_back(replace(it[0], {in(f->l)}));
            e.premises.push_back(replace(it[0], {in(f->r)}));
            return e;
        }
        case Rule::OrR1:
        case Rule::OrR2: {
            one_item(1);
            need(it[0] == nl, "principal must be the output");
            Fm f = rformula(Op::Or);
            e.premises.push_back(set_rhs(out(rule == Rule::OrR1 ? f->l : f->r)));
            return e;
        }
        case Rule::ImpL: {
            one_item(1);
            Fm f = lformula(0, Op::Imp);
            int i = it[0];
            auto pr = prune_fill(s, pos.path, out(f->l), fc, false, [&](Lhs& l) { l.erase(l.begin() + i); });
            e.premises.push_back(pr.seq);
            e.reindex = pr.reindex;
            e.premises.push_back(replace(i, {in(f->r)}));
            return e;
        }
        case Rule::ImpLS: {
            Fm f = lformula(0, Op::Imp);
            int i = it[0];
            size_t sp = spine_length(s, pos.path);
            std::vector<int> spath(pos.path.begin(), pos.path.begin() + sp);
            LevelView sv = level_at(s, spath);
            int ns = static_cast<int>(sv.lhs->size());
            std::vector<int> lam(it.begin() + 1, it.end());
            std::sort(lam.begin(), lam.end());
            need(std::adjacent_find(lam.begin(), lam.end()) == lam.end(), "repeated item");
            for (int k : lam) {
                need(k >= 0 && k < ns, "item out of range");
                if (sp < pos.path.size()) need(k != pos.path[sp], "Λ overlaps the principal's bracket");
                if (sp == pos.path.size()) need(k != i, "Λ overlaps the principal");
            }
            auto pr = prune_fill(s, pos.path, out(f->l), fc, true, [&](Lhs& l) { l.erase(l.begin() + i); });
            e.premises.push_back(pr.seq);
            e.reindex = pr.reindex;
            e.premises.push_back(edit_levels(s, pos.path, [&](std::vector<MutLevel>& lv) {
                (*lv.back().lhs)[i] = in(f->r);
                Lhs& sl = *lv[sp].lhs;
                for (auto k = lam.rbegin(); k != lam.rend(); ++k) sl.erase(sl.begin() + *k);
            }));
            return e;
        }
        case Rule::ImpR: {
            one_item(1);
            need(it[0] == nl, "principal must be the output");
            Fm f = rformula(Op::Imp);
            e.premises.push_back(set_rhs(out(f->r), {in(f->l)}));
            return e;
        }
        case Rule::BoxLBr:
        case Rule::FourLBr: {
            one_item(2);
            Fm f = lformula(0, Op::Box);
            need(rhs && it[1] == nl && rhs->is_bracket(), "aux must be the output box bracket");
            LItem moved = in(rule == Rule::BoxLBr ? f->l : f);
            int i = it[0];
            e.premises.push_back(edit_level(s, pos.path, [&](Lhs& l, RItem* rr) {
                Sequent b = *rr->body;
                b.lhs.push_back(moved);
                rr->body = std::make_shared<const Sequent>(std::move(b));
                l.erase(l.begin() + i);
            }));
            return e;
        }
        case Rule::BoxLDia:
        case Rule::FourLDia: {
            one_item(2);
            Fm f = lformula(0, Op::Box);
            int k = diabr_item(1);
            LItem moved = in(rule == Rule::BoxLDia ? f->l : f);
            int i = it[0];
            e.premises.push_back(edit_level(s, pos.path, [&](Lhs& l, RItem*) {
                l[k].body.push_back(moved);
                l.erase(l.begin() + i);
            }));
            return e;
        }
        case Rule::BoxR: {
            one_item(1);
            need(it[0] == nl, "principal must be the output");
            Fm f = rformula(Op::Box);
            e.premises.push_back(set_rhs(box_br(Sequent{{}, out(f->l)}, f->idx)));
            return e;
        }
        case Rule::DiaL: {
            one_item(1);
            Fm f = lformula(0, Op::Dia);
            e.premises.push_back(replace(it[0], {dia_br({in(f->l)}, f->idx)}));
            return e;
        }
        case Rule::DiaR:
        case Rule::FourR: {
            one_item(2);
            need(it[0] == nl, "principal must be the output");
            Fm f = rformula(Op::Dia);
            int k = diabr_item(1);
            e.fresh = fc ? fc->fresh(0) : -1;
            Sequent inner{lhs[k].body, out(rule == Rule::DiaR ? f->l : f)};
            e.premises.push_back(edit_level(s, pos.path, [&](Lhs& l, RItem* rr) {
                l.erase(l.begin() + k);
                *rr = box_br(inner, e.fresh);
            }));
            return e;
        }
        case Rule::TL: {
            one_item(1);
            Fm f = lformula(0, Op::Box);
            e.premises.push_back(replace(it[0], {in(f->l)}));
            return e;
        }
        case Rule::TR: {
            one_item(1);
            need(it[0] == nl, "principal must be the output");
            Fm f = rformula(Op::Dia);
            e.premises.push_back(set_rhs(out(f->l)));
            return e;
        }
        case Rule::Upd: {
            need(!it.empty() && rhs && it[0] == nl && rhs->is_bracket(), "first item must be the output box bracket");
            const Sequent& b = *rhs->body;
            std::vector<int> lam(it.begin() + 1, it.end());
            std::sort(lam.begin(), lam.end());
            need(std::adjacent_find(lam.begin(), lam.end()) == lam.end(), "repeated item");
            for (int k : lam) need(k >= 0 && size_t(k) < b.lhs.size(), "item out of range");
            Lhs moved;
            for (int k : lam) moved.push_back(b.lhs[k]);
            e.fresh = fc ? fc->fresh(3) : -1;
            e.premises.push_back(edit_level(s, pos.path, [&](Lhs& l, RItem* rr) {
                Sequent nb = *rr->body;
                for (auto k = lam.rbegin(); k != lam.rend(); ++k) nb.lhs.erase(nb.lhs.begin() + *k);
                rr->body = std::make_shared<const Sequent>(std::move(nb));
                l.push_back(dia_br(moved, e.fresh));
            }));
            return e;
        }
    }
    not_applicable(rule, "unknown rule");
}

// ---------------------------------------------------------------------------
// Checking

namespace {

struct Binding {
    const std::set<int>* old;
    std::map<int, int> bind;
    std::set<int> used;

    bool idx(int e, int a) {
        if (e < 0 || a < 0) return e == a;
        if (old->count(e)) return e == a;
        auto it = bind.find(e);
        if (it != bind.end()) return it->second == a;
        if (old->count(a) || used.count(a) || a % 4 != e % 4) return false;
        bind[e] = a;
        used.insert(a);
        return true;
    }
};

bool match_fm(const Fm& e, const Fm& a, Binding& b) {
    if (e->op != a->op) return false;
    switch (e->op) {
        case Op::Bot:
            return true;
        case Op::Atom:
            return e->name == a->name;
        case Op::Box:
        case Op::Dia:
            return b.idx(e->idx, a->idx) && match_fm(e->l, a->l, b);
        default:
            return match_fm(e->l, a->l, b) && match_fm(e->r, a->r, b);
    }
}

bool match_lhs(const Lhs& e, const Lhs& a, Binding& b);

bool match_item(const LItem& e, const LItem& a, Binding& b) {
    if (e.is_bracket() != a.is_bracket()) return false;
    if (!e.is_bracket()) return match_fm(e.f, a.f, b);
    return b.idx(e.idx, a.idx) && match_lhs(e.body, a.body, b);
}

bool match_from(const Lhs& e, const Lhs& a, size_t i, std::vector<bool>& taken, Binding& b) {
    if (i == e.size()) return true;
    for (size_t j = 0; j < a.size(); ++j) {
        if (taken[j] || compare(e[i], a[j], false) != 0) continue;
        Binding trial = b;
        if (!match_item(e[i], a[j], trial)) continue;
        taken[j] = true;
        if (match_from(e, a, i + 1, taken, trial)) {
            b = std::move(trial);
            return true;
        }
        taken[j] = false;
    }
    return false;
}

bool match_lhs(const Lhs& e, const Lhs& a, Binding& b) {
    if (e.size() != a.size()) return false;
    std::vector<bool> taken(a.size(), false);
    return match_from(e, a, 0, taken, b);
}

bool match_seq(const Sequent& e, const Sequent& a, Binding& b) {
    Binding trial = b;
    if (!match_lhs(e.lhs, a.lhs, trial)) return false;
    if (e.rhs.is_bracket() != a.rhs.is_bracket()) return false;
    if (e.rhs.is_bracket()) {
        if (!trial.idx(e.rhs.idx, a.rhs.idx) || !match_seq(*e.rhs.body, *a.rhs.body, trial)) return false;
    } else if (!match_fm(e.rhs.f, a.rhs.f, trial)) {
        return false;
    }
    b = std::move(trial);
    return true;
}

CheckResult fail(std::vector<int> node, const std::string& msg) {
    CheckResult r;
    r.ok = false;
    r.node = std::move(node);
    std::string where = "node [";
    for (size_t i = 0; i < r.node.size(); ++i) where += (i ? "," : "") + std::to_string(r.node[i]);
    r.error = where + "]: " + msg;
    return r;
}

CheckResult check_rec(const Derivation& d, Logic l, std::vector<int>& node) {
    if (d.logic != l) return fail(node, "logic tag differs from the proof's logic");
    if (!rule_in_logic(d.rule, l)) return fail(node, "rule " + rule_name(d.rule) + " is not in " + logic_name(l));
    Fm f = fm(d.conclusion);
    bool annotated = !ann(f).empty();
    if (annotated) {
        std::string why;
        if (!is_annotated(f) || !properly_annotated(f, true, &why))
            return fail(node, "conclusion not properly annotated: " + why);
    }
    Expansion e;
    try {
        e = apply_rule_backward(d.conclusion, d.rule, d.principal);
    } catch (const std::exception& ex) {
        return fail(node, ex.what());
    }
    if (e.premises.size() != d.premises.size())
        return fail(node, rule_name(d.rule) + " expects " + std::to_string(e.premises.size()) + " premises, got " +
                              std::to_string(d.premises.size()));
    std::set<int> old = ann(d.conclusion);
    Binding b{&old, {}, {}};
    for (size_t k = 0; k < e.premises.size(); ++k) {
        const Sequent& got = d.premises[k].conclusion;
        bool ok = annotated ? match_seq(e.premises[k], got, b) : compare(e.premises[k], got) == 0;
        if (!ok)
            return fail(node, "premise " + std::to_string(k) + " mismatch: expected " + to_string(e.premises[k]) +
                                  ", got " + to_string(got));
    }
    for (size_t k = 0; k < d.premises.size(); ++k) {
        node.push_back(static_cast<int>(k));
        CheckResult r = check_rec(d.premises[k], l, node);
        node.pop_back();
        if (!r) return r;
    }
    return {};
}

}  // namespace

CheckResult check_proof(const Derivation& d, Logic l) {
    std::vector<int> node;
    return check_rec(d, l, node);
}

Expansion matched_expansion(const Derivation& d) {
    Expansion e = apply_rule_backward(d.conclusion, d.rule, d.principal);
    if (e.premises.size() != d.premises.size()) throw std::runtime_error("premise count mismatch");
    std::set<int> old = ann(d.conclusion);
    Binding b{&old, {}, {}};
    for (size_t k = 0; k < e.premises.size(); ++k)
        if (!match_seq(e.premises[k], d.premises[k].conclusion, b))
            throw std::runtime_error("premise " + std::to_string(k) + " does not match its rule");
    auto rn = [&](int i) {
        auto it = b.bind.find(i);
        return it == b.bind.end() ? i : it->second;
    };
    for (auto& m : e.copies)
        for (auto& [k, v] : m) v = rn(v);
    for (auto& [k, v] : e.reindex) v = rn(v);
    e.fresh = e.fresh < 0 ? -1 : rn(e.fresh);
    for (size_t k = 0; k < e.premises.size(); ++k) e.premises[k] = d.premises[k].conclusion;
    return e;
}

// ---------------------------------------------------------------------------
// Search

namespace {

struct LevelRef {
    std::vector<int> path;
    LevelView v;
};

void collect_levels(const Lhs& lhs, const RItem* rhs, std::vector<int>& path, std::vector<LevelRef>& out) {
    out.push_back({path, {&lhs, rhs}});
    for (size_t k = 0; k < lhs.size(); ++k) {
        if (!lhs[k].is_bracket()) continue;
        path.push_back(static_cast<int>(k));
        collect_levels(lhs[k].body, nullptr, path, out);
        path.pop_back();
    }
    if (rhs && rhs->is_bracket()) {
        path.push_back(static_cast<int>(lhs.size()));
        collect_levels(rhs->body->lhs, &rhs->body->rhs, path, out);
        path.pop_back();
    }
}

std::vector<LevelRef> levels_of(const Sequent& s) {
    std::vector<LevelRef> out;
    std::vector<int> path;
    collect_levels(s.lhs, &s.rhs, path, out);
    return out;
}

bool lhs_has(const Lhs& l, const Fm& f) {
    for (auto& i : l)
        if (!i.is_bracket() && compare(i.f, f) == 0) return true;
    return false;
}

struct Candidate {
    Rule rule;
    Position pos;
    bool contract = false;  // duplicate the principal first
};

// Where the redex at pos sits once its first item is duplicated and the
// sequent renormalised. Brackets are traced through temporary marker indices
// (search sequents are unannotated), formula items by equality.
Position relocate(const Sequent& s, const Position& pos, const Sequent& expect) {
    constexpr int kPath = -1000, kItem = -2000;
    const Lhs& l0 = *level_at(s, pos.path).lhs;
    int nl = static_cast<int>(l0.size());
    Sequent m = normalize(edit_levels(
        s, pos.path,
        [&](std::vector<MutLevel>& lv) {
            for (size_t t = 0; t < pos.path.size(); ++t) {
                int k = pos.path[t];
                if (k < static_cast<int>(lv[t].lhs->size())) (*lv[t].lhs)[k].idx = kPath - int(t);
            }
            Lhs& l = *lv.back().lhs;
            for (size_t k = 1; k < pos.items.size(); ++k)
                if (pos.items[k] < nl && l[pos.items[k]].is_bracket()) l[pos.items[k]].idx = kItem - int(k);
            l.push_back(l0[pos.items[0]]);
        },
        false));
    Position out;
    LevelView v{&m.lhs, &m.rhs};
    for (size_t t = 0; t < pos.path.size(); ++t) {
        int k = -1;
        for (size_t j = 0; j < v.lhs->size(); ++j)
            if ((*v.lhs)[j].idx == kPath - int(t)) k = static_cast<int>(j);
        if (k < 0) {
            out.path.push_back(static_cast<int>(v.lhs->size()));
            v = {&v.rhs->body->lhs, &v.rhs->body->rhs};
        } else {
            out.path.push_back(k);
            v = {&(*v.lhs)[k].body, nullptr};
        }
    }
    const Lhs& l = *v.lhs;
    for (size_t k = 0; k < pos.items.size(); ++k) {
        int a = pos.items[k];
        int b = -1;
        if (a == nl) {
            b = static_cast<int>(l.size());
        } else if (l0[a].is_bracket()) {
            for (size_t j = 0; j < l.size(); ++j)
                if (l[j].idx == kItem - int(k)) b = static_cast<int>(j);
        } else {
            for (size_t j = 0; j < l.size() && b < 0; ++j)
                if (!l[j].is_bracket() && compare(l[j].f, l0[a].f) == 0 &&
                    std::find(out.items.begin(), out.items.end(), int(j)) == out.items.end())
                    b = static_cast<int>(j);
        }
        if (b < 0) throw std::logic_error("relocate: item lost");
        out.items.push_back(b);
    }
    Sequent clean = edit_levels(
        m, out.path,
        [&](std::vector<MutLevel>& lv) {
            for (auto& x : lv)
                for (auto& it : *x.lhs)
                    if (it.idx <= kPath) it.idx = -1;
        },
        false);
    if (compare(clean, expect) != 0) throw std::logic_error("relocate: contraction premise mismatch");
    return out;
}

class Searcher {
   public:
    Searcher(Logic l, long* nodes) : logic_(l), nodes_(nodes) {}

    std::optional<Derivation> prove(const Sequent& s, int depth, int contr) {
        if (depth <= 0 || *nodes_ <= 0) return std::nullopt;
        --*nodes_;
        std::string key = to_string(s) + "#" + std::to_string(contr);
        auto fit = failed_.find(key);
        if (fit != failed_.end() && fit->second >= depth) return std::nullopt;
        auto res = prove_uncached(s, depth, contr);
        if (!res && *nodes_ > 0) {
            int& f = failed_[key];
            f = std::max(f, depth);
        }
        return res;
    }

   private:
    Derivation node(const Sequent& s, Rule r, Position p) {
        Derivation d;
        d.logic = logic_;
        d.conclusion = s;
        d.rule = r;
        d.principal = std::move(p);
        return d;
    }

    std::optional<Derivation> close(const Sequent& s, Rule r, const Position& p, int depth, int contr) {
        Expansion e = apply_rule_backward(s, r, p);
        Derivation d = node(s, r, p);
        for (auto& prem : e.premises) {
            auto sub = prove(prem, depth - 1, contr);
            if (!sub) return std::nullopt;
            d.premises.push_back(std::move(*sub));
        }
        return d;
    }

    std::optional<Derivation> try_candidate(const Sequent& s, const Candidate& c, int depth, int contr) {
        if (!c.contract) return close(s, c.rule, c.pos, depth, contr);
        if (contr <= 0) return std::nullopt;
        int i = c.pos.items[0];
        Position cp{c.pos.path, {i}};
        Expansion ce = apply_rule_backward(s, Rule::Contr, cp);
        const Sequent& s2 = ce.premises[0];
        Position p2 = relocate(s, c.pos, s2);
        auto sub = close(s2, c.rule, p2, depth, contr - 1);
        if (!sub) return std::nullopt;
        Derivation d = node(s, Rule::Contr, cp);
        d.premises.push_back(std::move(*sub));
        return d;
    }

    std::optional<Derivation> prove_uncached(const Sequent& s, int depth, int contr) {
        auto levels = levels_of(s);
        // Axioms.
        for (auto& lv : levels) {
            const Lhs& l = *lv.v.lhs;
            for (size_t k = 0; k < l.size(); ++k)
                if (!l[k].is_bracket() && l[k].f->op == Op::Bot)
                    return node(s, Rule::BotL, {lv.path, {int(k)}});
        }
        for (auto& lv : levels) {
            if (!lv.v.rhs || lv.v.rhs->is_bracket() || lv.v.rhs->f->op != Op::Atom) continue;
            const Lhs& l = *lv.v.lhs;
            for (size_t k = 0; k < l.size(); ++k)
                if (!l[k].is_bracket() && compare(l[k].f, lv.v.rhs->f) == 0)
                    return node(s, Rule::Id, {lv.path, {int(k)}});
        }
        // Invertible rules, committed.
        for (auto& lv : levels) {
            const Lhs& l = *lv.v.lhs;
            int nl = static_cast<int>(l.size());
            if (lv.v.rhs && !lv.v.rhs->is_bracket()) {
                Op op = lv.v.rhs->f->op;
                if (op == Op::Imp) return close(s, Rule::ImpR, {lv.path, {nl}}, depth, contr);
                if (op == Op::And) return close(s, Rule::AndR, {lv.path, {nl}}, depth, contr);
                if (op == Op::Box) return close(s, Rule::BoxR, {lv.path, {nl}}, depth, contr);
            }
            for (int k = 0; k < nl; ++k) {
                if (l[k].is_bracket()) continue;
                Op op = l[k].f->op;
                if (op == Op::And) return close(s, Rule::AndL, {lv.path, {k}}, depth, contr);
                if (op == Op::Or) return close(s, Rule::OrL, {lv.path, {k}}, depth, contr);
                if (op == Op::Dia) return close(s, Rule::DiaL, {lv.path, {k}}, depth, contr);
            }
        }
        // Choices.
        std::vector<Candidate> cands;
        bool t = has_t(logic_), four = has_4(logic_);
        for (auto& lv : levels) {
            const Lhs& l = *lv.v.lhs;
            int nl = static_cast<int>(l.size());
            for (int k = 0; k < nl; ++k) {
                if (l[k].is_bracket() || l[k].f->op != Op::Box) continue;
                const Fm& f = l[k].f;
                if (lv.v.rhs && lv.v.rhs->is_bracket()) {
                    const Lhs& tl = lv.v.rhs->body->lhs;
                    if (!lhs_has(tl, f->l)) cands.push_back({Rule::BoxLBr, {lv.path, {k, nl}}});
                    if (four && !lhs_has(tl, f)) cands.push_back({Rule::FourLBr, {lv.path, {k, nl}}});
                }
                for (int j = 0; j < nl; ++j) {
                    if (!l[j].is_bracket()) continue;
                    if (!lhs_has(l[j].body, f->l)) cands.push_back({Rule::BoxLDia, {lv.path, {k, j}}});
                    if (four && !lhs_has(l[j].body, f)) cands.push_back({Rule::FourLDia, {lv.path, {k, j}}});
                }
                if (t && !lhs_has(l, f->l)) cands.push_back({Rule::TL, {lv.path, {k}}});
            }
            if (lv.v.rhs && !lv.v.rhs->is_bracket()) {
                Op op = lv.v.rhs->f->op;
                if (op == Op::Dia) {
                    for (int j = 0; j < nl; ++j) {
                        if (!l[j].is_bracket()) continue;
                        cands.push_back({Rule::DiaR, {lv.path, {nl, j}}});
                        if (four) cands.push_back({Rule::FourR, {lv.path, {nl, j}}});
                    }
                    if (t) cands.push_back({Rule::TR, {lv.path, {nl}}});
                }
                if (op == Op::Or) {
                    cands.push_back({Rule::OrR1, {lv.path, {nl}}});
                    cands.push_back({Rule::OrR2, {lv.path, {nl}}});
                }
            }
            for (int k = 0; k < nl; ++k)
                if (!l[k].is_bracket() && l[k].f->op == Op::Imp) cands.push_back({Rule::ImpL, {lv.path, {k}}});
        }
        for (auto& c : cands)
            if (auto d = try_candidate(s, c, depth, contr)) return d;
        if (contr > 0) {
            for (auto c : cands) {
                bool left = c.rule != Rule::DiaR && c.rule != Rule::FourR && c.rule != Rule::TR &&
                            c.rule != Rule::OrR1 && c.rule != Rule::OrR2;
                if (!left) continue;
                c.contract = true;
                if (auto d = try_candidate(s, c, depth, contr)) return d;
            }
        }
        return std::nullopt;
    }

    Logic logic_;
    long* nodes_;
    std::unordered_map<std::string, int> failed_;
};

}  // namespace

std::optional<Derivation> search(const Sequent& s, Logic l, int depth_budget, long node_budget) {
    Sequent n = normalize(s);
    long nodes = node_budget;
    for (int contr = 0; contr <= 3; ++contr) {
        Searcher se(l, &nodes);
        for (int d = 1; d <= depth_budget; ++d)
            if (auto r = se.prove(n, d, contr)) return r;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Macro decomposition of imp_l

namespace {

// Distinct indices of items in `lhs` equal to those of `wanted`.
std::vector<int> locate(const Lhs& lhs, const Lhs& wanted) {
    std::vector<bool> taken(lhs.size(), false);
    std::vector<int> out;
    for (auto& w : wanted) {
        bool found = false;
        for (size_t j = 0; j < lhs.size(); ++j) {
            if (taken[j] || compare(lhs[j], w) != 0) continue;
            taken[j] = true;
            out.push_back(static_cast<int>(j));
            found = true;
            break;
        }
        if (!found) throw std::runtime_error("decompose: item not found");
    }
    return out;
}

Derivation mk_node(Logic l, const Sequent& s, Rule r, Position p, std::vector<Derivation> prem) {
    Derivation d;
    d.logic = l;
    d.conclusion = s;
    d.rule = r;
    d.principal = std::move(p);
    d.premises = std::move(prem);
    return d;
}

Derivation decompose_node(const Derivation& d, std::vector<Derivation> subs) {
    const Sequent& c = d.conclusion;
    const auto& path = d.principal.path;
    size_t sp = spine_length(c, path);
    std::vector<int> spath(path.begin(), path.begin() + sp);
    Fm principal = (*level_at(c, path).lhs)[d.principal.items[0]].f;
    // The principal's bracket at the spine level (if any), to find it again later.
    std::optional<LItem> chain_item;
    if (sp < path.size()) chain_item = (*level_at(c, spath).lhs)[path[sp]];

    // Levels of Π's bracket chain: B_1 .. B_m.
    std::vector<Lhs> orig;
    {
        LevelView v = level_at(c, spath);
        const RItem* r = v.rhs;
        while (r->is_bracket()) {
            orig.push_back(r->body->lhs);
            r = &r->body->rhs;
        }
    }
    size_t m = orig.size();

    // Build the chain bottom-up from the conclusion.
    struct Step {
        Sequent concl;
        Rule rule;
        Position pos;
    };
    std::vector<Step> steps;
    Sequent cur = c;
    std::optional<LItem> moved;  // diamond bracket created by the previous upd
    for (size_t j = m; j >= 1; --j) {
        // Resolve RHS steps against the current sequent.
        auto resolve = [&](size_t upto) {
            std::vector<int> p = spath;
            LevelView v = level_at(cur, spath);
            for (size_t q = 0; q < upto; ++q) {
                p.push_back(static_cast<int>(v.lhs->size()));
                v = {&v.rhs->body->lhs, &v.rhs->body->rhs};
            }
            return p;
        };
        std::vector<int> bj = resolve(j);
        if (!orig[j - 1].empty()) {
            Position cp{bj, locate(*level_at(cur, bj).lhs, orig[j - 1])};
            std::sort(cp.items.begin(), cp.items.end());
            Expansion e = apply_rule_backward(cur, Rule::Contr, cp);
            steps.push_back({cur, Rule::Contr, cp});
            cur = e.premises[0];
        }
        std::vector<int> parent = resolve(j - 1);
        Lhs hoist = orig[j - 1];
        if (moved) hoist.push_back(*moved);
        LevelView pv = level_at(cur, parent);
        Position up{parent, {static_cast<int>(pv.lhs->size())}};
        for (int k : locate(pv.rhs->body->lhs, hoist)) up.items.push_back(k);
        std::sort(up.items.begin() + 1, up.items.end());
        Expansion e = apply_rule_backward(cur, Rule::Upd, up);
        steps.push_back({cur, Rule::Upd, up});
        cur = e.premises[0];
        moved = dia_br(hoist, -1);
        normalize(moved->body);
    }

    // imp_l_s with Λ = the hoisted bracket.
    LevelView sv = level_at(cur, spath);
    std::vector<int> npath = spath;
    Position ip;
    if (chain_item) {
        int ci = locate(*sv.lhs, {*chain_item})[0];
        if (moved && compare(*moved, *chain_item) == 0) {
            // Both equal: pick a copy different from the one used for Λ below.
            auto both = locate(*sv.lhs, {*chain_item, *moved});
            ci = both[0];
        }
        npath.push_back(ci);
        npath.insert(npath.end(), path.begin() + sp + 1, path.end());
        ip.path = npath;
        ip.items = {d.principal.items[0]};
    } else {
        ip.path = spath;
        ip.items = {locate(*sv.lhs, {in(principal)})[0]};
    }
    if (moved) {
        std::vector<bool> taken(sv.lhs->size(), false);
        if (chain_item)
            taken[npath[sp]] = true;
        else
            taken[ip.items[0]] = true;
        int lam = -1;
        for (size_t j = 0; j < sv.lhs->size(); ++j)
            if (!taken[j] && compare((*sv.lhs)[j], *moved) == 0) {
                lam = static_cast<int>(j);
                break;
            }
        if (lam < 0) throw std::runtime_error("decompose: hoisted bracket not found");
        ip.items.push_back(lam);
    }
    Expansion e = apply_rule_backward(cur, Rule::ImpLS, ip);
    if (compare(e.premises[0], subs[0].conclusion) != 0 || compare(e.premises[1], subs[1].conclusion) != 0)
        throw std::runtime_error("decompose: premises do not line up with the original imp_l");
    Derivation top = mk_node(d.logic, cur, Rule::ImpLS, ip, std::move(subs));
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        std::vector<Derivation> p;
        p.push_back(std::move(top));
        top = mk_node(d.logic, it->concl, it->rule, it->pos, std::move(p));
    }
    return top;
}

}  // namespace

Derivation decompose_impL(const Derivation& d) {
    std::vector<Derivation> subs;
    for (auto& p : d.premises) subs.push_back(decompose_impL(p));
    if (d.rule != Rule::ImpL) {
        Derivation out = d;
        out.premises = std::move(subs);
        return out;
    }
    return decompose_node(d, std::move(subs));
}

// ---------------------------------------------------------------------------
// Annotation

namespace {
Lhs annotate_lhs(const Lhs& l, Counter& c) {
    Lhs out;
    for (auto& i : l) {
        if (i.is_bracket()) {
            int n = c.fresh(3);
            out.push_back(dia_br(annotate_lhs(i.body, c), n));
        } else {
            out.push_back(in(properly_annotate(i.f, c, false)));
        }
    }
    return out;
}
}  // namespace

Sequent annotate_sequent(const Sequent& s, Counter& c) {
    Sequent t;
    t.lhs = annotate_lhs(s.lhs, c);
    if (s.rhs.is_bracket()) {
        int n = c.fresh(0);
        t.rhs = box_br(annotate_sequent(*s.rhs.body, c), n);
    } else {
        t.rhs = out(properly_annotate(s.rhs.f, c, true));
    }
    return normalize(std::move(t));
}

namespace {
Derivation annotate_rec(const Derivation& d, const Sequent& concl, Counter& c) {
    Derivation out;
    out.logic = d.logic;
    out.conclusion = concl;
    out.rule = d.rule;
    out.principal = d.principal;
    Expansion e = apply_rule_backward(concl, d.rule, d.principal, &c);
    for (size_t k = 0; k < d.premises.size(); ++k) out.premises.push_back(annotate_rec(d.premises[k], e.premises[k], c));
    return out;
}
}  // namespace

Derivation annotate_proof(const Derivation& d, Counter& c) {
    if (!ann(fm(d.conclusion)).empty()) throw std::invalid_argument("proof is already annotated");
    Sequent concl = annotate_sequent(d.conclusion, c);
    c.reserve_all(ann(concl));
    return annotate_rec(d, concl, c);
}

Derivation annotate_proof(const Derivation& d, int seed) {
    Counter c(seed);
    return annotate_proof(d, c);
}

Derivation erase(const Derivation& d) {
    Derivation out = d;
    out.conclusion = erase(d.conclusion);
    for (auto& p : out.premises) p = erase(p);
    return out;
}

int count_nodes(const Derivation& d) {
    int n = 1;
    for (auto& p : d.premises) n += count_nodes(p);
    return n;
}

bool contains_rule(const Derivation& d, Rule r) {
    if (d.rule == r) return true;
    for (auto& p : d.premises)
        if (contains_rule(p, r)) return true;
    return false;
}

nlohmann::json to_json(const Derivation& d) {
    nlohmann::json j;
    j["logic"] = logic_name(d.logic);
    j["conclusion"] = to_json(d.conclusion);
    j["rule"] = rule_name(d.rule);
    j["principal"] = nlohmann::json::array({d.principal.path, d.principal.items});
    nlohmann::json prem = nlohmann::json::array();
    for (auto& p : d.premises) prem.push_back(to_json(p));
    j["premises"] = prem;
    return j;
}

Derivation derivation_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("proof node must be an object");
    static const std::set<std::string> keys = {"logic", "conclusion", "rule", "principal", "premises"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!keys.count(it.key())) throw std::invalid_argument("unknown key '" + it.key() + "' in proof node");
    for (auto& k : keys)
        if (!j.contains(k)) throw std::invalid_argument("missing key '" + k + "' in proof node");
    Derivation d;
    d.logic = logic_from_name(j.at("logic").get<std::string>());
    d.conclusion = sequent_from_json(j.at("conclusion"));
    d.rule = rule_from_name(j.at("rule").get<std::string>());
    const auto& p = j.at("principal");
    if (!p.is_array() || p.size() != 2) throw std::invalid_argument("principal must be [[path],[items]]");
    d.principal.path = p[0].get<std::vector<int>>();
    d.principal.items = p[1].get<std::vector<int>>();
    for (auto& q : j.at("premises")) d.premises.push_back(derivation_from_json(q));
    return d;
}

namespace {
void text_rec(const Derivation& d, int indent, std::string& out) {
    out += std::string(indent * 2, ' ') + rule_name(d.rule) + "  " + to_string(d.conclusion) + "\n";
    for (auto& p : d.premises) text_rec(p, indent + 1, out);
}
}  // namespace

std::string to_text(const Derivation& d) {
    std::string out;
    text_rec(d, 0, out);
    return out;
}

}  // namespace jreal
