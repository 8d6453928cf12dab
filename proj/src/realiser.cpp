#include "jreal/realiser.hpp"

#include <algorithm>
#include <functional>

namespace jreal {

namespace {
bool pos_idx(int i) { return i % 2 == 0; }
bool eq(const JFm& a, const JFm& b) { return compare(a, b) == 0; }
bool eqt(const Tm& a, const Tm& b) { return compare(a, b) == 0; }

[[noreturn]] void internal(const std::string& msg) { throw RealiserError(RealiserError::Internal, msg); }
}  // namespace

Var var_of(int idx) {
    if (idx % 4 == 1) return {'x', idx / 4};
    if (idx % 4 == 3) return {'a', idx / 4};
    internal("index " + std::to_string(idx) + " has no forced variable");
}

Realisation restrict(const Realisation& r, const std::set<int>& idx) {
    Realisation out;
    for (auto& [k, t] : r)
        if (idx.count(k)) out.emplace(k, t);
    return out;
}

Realisation union_real(const Realisation& r, const Realisation& r2) {
    Realisation out = r;
    for (auto& [k, t] : r2) {
        auto it = out.find(k);
        if (it == out.end()) {
            out.emplace(k, t);
            continue;
        }
        if (k % 2 == 0)
            throw RealiserError(RealiserError::IllegalUnion, "both realisations define even index " + std::to_string(k));
        if (!eqt(it->second, t))
            throw RealiserError(RealiserError::IllegalUnion, "realisations disagree at index " + std::to_string(k));
    }
    return out;
}

Realisation compose(const Subst& s, const Realisation& r, const Fm& a) {
    auto nv = negvar(a);
    for (auto& v : s.dom())
        if (nv.count(v))
            throw RealiserError(RealiserError::IllegalCompose, "substitution touches negative variable " + to_string(v));
    Realisation out;
    for (auto& [k, t] : r) out.emplace(k, s.apply(t));
    return out;
}

Realisation recipe(const std::set<int>& idx) {
    Realisation out;
    for (int i : idx) out.emplace(i, recipe_term(i));
    return out;
}

Realisation subst_positive(const Subst& s, const Realisation& r) {
    if (s.empty()) return r;
    Realisation out;
    for (auto& [k, t] : r) out.emplace(k, pos_idx(k) ? s.apply(t) : t);
    return out;
}

// ---------------------------------------------------------------------------
// Merging

namespace {

struct MState {
    ProofBuilder& b;
    const Realisation& r1;
    const Realisation& r2;
    Realisation r;
    Subst theta;
    std::vector<int> slots;
    bool record = false;
    std::vector<std::pair<SubCert, std::array<int, 2>>> rec;  // slot indices

    void apply(const Subst& t) {
        if (t.empty()) return;
        theta = t.after(theta);
        r = subst_positive(t, r);
        for (auto& s : slots)
            if (s >= 0) s = b.subst(t, s);
    }
    JFm side(int i, const Fm& f) const { return theta.apply(apply_realisation(i == 0 ? r1 : r2, f)); }
    JFm mine(const Fm& f) const { return apply_realisation(r, f); }
    int add(int step) {
        slots.push_back(step);
        return static_cast<int>(slots.size()) - 1;
    }
    int glue(const JFm& goal, std::vector<int> lemmas) {
        if (imp_same(goal)) return -1;
        lemmas.erase(std::remove(lemmas.begin(), lemmas.end(), -1), lemmas.end());
        return b.derive(goal, lemmas);
    }
    static bool imp_same(const JFm& g) { return g->op == JOp::Imp && eq(g->l, g->r); }
    int step(int slot) const { return slot < 0 ? -1 : slots[slot]; }

    std::array<int, 2> identity_slots() { return {add(-1), add(-1)}; }

    std::array<int, 2> go(const Fm& x, bool pos, std::vector<int>& path) {
        auto res = go_inner(x, pos, path);
        if (record) rec.push_back({SubCert{path, pos, {-1, -1}}, res});
        return res;
    }

    std::array<int, 2> go_inner(const Fm& x, bool pos, std::vector<int>& path) {
        // Agreement on every positive index: nothing to merge.
        bool same = true;
        for (int i : ann(x)) {
            if (!pos_idx(i)) continue;
            if (!eqt(theta.apply(r1.at(i)), theta.apply(r2.at(i)))) {
                same = false;
                break;
            }
        }
        if (same) {
            for (int i : ann(x)) r[i] = pos_idx(i) ? theta.apply(r1.at(i)) : forced_var(i);
            return identity_slots();
        }
        switch (x->op) {
            case Op::Bot:
            case Op::Atom:
                return identity_slots();
            case Op::And:
            case Op::Or:
            case Op::Imp: {
                path.push_back(0);
                auto sl = go(x->l, x->op == Op::Imp ? !pos : pos, path);
                path.back() = 1;
                auto sr = go(x->r, pos, path);
                path.pop_back();
                std::array<int, 2> out;
                for (int i = 0; i < 2; ++i) {
                    JFm g = pos ? jimp(side(i, x), mine(x)) : jimp(mine(x), side(i, x));
                    out[i] = add(glue(g, {step(sl[i]), step(sr[i])}));
                }
                return out;
            }
            case Op::Box:
            case Op::Dia:
                break;
        }
        bool box = x->op == Op::Box;
        int idx = x->idx;
        path.push_back(0);
        auto sb = go(x->l, pos, path);
        path.pop_back();
        const Fm& body = x->l;
        JFm rb = mine(body);
        std::array<int, 2> out;
        if (pos) {
            Tm u[2];
            int st[2] = {-1, -1};
            for (int i = 0; i < 2; ++i) {
                Tm tau = theta.apply((i == 0 ? r1 : r2).at(idx));
                int cb = step(sb[i]);
                if (cb < 0) {
                    u[i] = tau;
                    continue;
                }
                auto [s, ss] = b.internalise(cb);
                JFm prem = b.formula(cb);  // θ r_i(B) -> r(B)
                if (box) {
                    u[i] = app(s, tau);
                    JFm ax = jimp(just(s, prem), jimp(just(tau, prem->l), just(u[i], prem->r)));
                    st[i] = b.mp(b.axiom(Schema::Jk1, ax), ss);
                } else {
                    u[i] = prop(s, tau);
                    JFm ax = jimp(just(s, prem), jimp(sat(tau, prem->l), sat(u[i], prem->r)));
                    st[i] = b.mp(b.axiom(Schema::Jk2, ax), ss);
                }
            }
            Tm t = eqt(u[0], u[1]) ? u[0] : (box ? sum(u[0], u[1]) : uni(u[0], u[1]));
            r[idx] = t;
            for (int i = 0; i < 2; ++i) {
                std::vector<int> lem = {st[i]};
                if (!eqt(t, u[i])) {
                    Schema sc = box ? (i == 0 ? Schema::JSumL : Schema::JSumR) : (i == 0 ? Schema::JUniL : Schema::JUniR);
                    JFm ax = box ? jimp(just(u[i], rb), just(t, rb)) : jimp(sat(u[i], rb), sat(t, rb));
                    lem.push_back(b.axiom(sc, ax));
                }
                out[i] = add(glue(jimp(side(i, x), mine(x)), lem));
            }
            return out;
        }
        Tm v = forced_var(idx);
        Var var = var_of(idx);
        if (vars(rb).count(var)) internal("variable " + to_string(var) + " occurs in its own body");
        Tm w[2];
        int st[2] = {-1, -1};
        for (int i = 0; i < 2; ++i) {
            int cb = step(sb[i]);
            if (cb < 0) {
                w[i] = v;
                continue;
            }
            auto [s, ss] = b.internalise(cb);
            JFm prem = b.formula(cb);  // r(B) -> θ r_i(B)
            if (box) {
                w[i] = app(s, v);
                JFm ax = jimp(just(s, prem), jimp(just(v, prem->l), just(w[i], prem->r)));
                st[i] = b.mp(b.axiom(Schema::Jk1, ax), ss);
            } else {
                w[i] = prop(s, v);
                JFm ax = jimp(just(s, prem), jimp(sat(v, prem->l), sat(w[i], prem->r)));
                st[i] = b.mp(b.axiom(Schema::Jk2, ax), ss);
            }
        }
        r[idx] = v;
        Tm t = eqt(w[0], w[1]) ? w[0] : (box ? sum(w[0], w[1]) : uni(w[0], w[1]));
        JFm bodies[2] = {side(0, body), side(1, body)};
        Subst th;
        if (!eqt(t, v)) th.m[var] = t;
        apply(th);
        for (int i = 0; i < 2; ++i) {
            std::vector<int> lem = {st[i]};
            if (!eqt(t, w[i])) {
                Schema sc = box ? (i == 0 ? Schema::JSumL : Schema::JSumR) : (i == 0 ? Schema::JUniL : Schema::JUniR);
                JFm ax = box ? jimp(just(w[i], bodies[i]), just(t, bodies[i])) : jimp(sat(w[i], bodies[i]), sat(t, bodies[i]));
                lem.push_back(b.axiom(sc, ax));
            }
            out[i] = add(glue(jimp(mine(x), side(i, x)), lem));
        }
        return out;
    }
};

}  // namespace

MergeResult merge_items(ProofBuilder& b, const std::vector<std::pair<Fm, bool>>& items, const Realisation& r1,
                        const Realisation& r2, bool record_all) {
    MState st{b, r1, r2, {}, {}, {}, record_all, {}};
    std::vector<std::array<int, 2>> top;
    for (size_t j = 0; j < items.size(); ++j) {
        std::vector<int> path = {static_cast<int>(j)};
        top.push_back(st.go(items[j].first, items[j].second, path));
    }
    MergeResult res;
    res.r = st.r;
    res.sigma = st.theta;
    for (auto& t : top) res.certs.push_back({st.step(t[0]), st.step(t[1])});
    for (auto& [sc, sl] : st.rec) {
        SubCert c = sc;
        c.cert = {st.step(sl[0]), st.step(sl[1])};
        res.all.push_back(c);
    }
    return res;
}

MergeResult merge_sequent(ProofBuilder& b, const Sequent& g, const Lhs& lam, const Realisation& r1,
                          const Realisation& r2) {
    std::vector<std::pair<Fm, bool>> items = {{fm(g), true}};
    if (!lam.empty()) items.push_back({fm_lhs(lam), false});
    return merge_items(b, items, r1, r2, false);
}

// ---------------------------------------------------------------------------
// Driver

namespace {

LevelView find_level(const Sequent& s, const std::vector<int>& ids, size_t upto) {
    LevelView v{&s.lhs, &s.rhs};
    for (size_t t = 0; t < upto; ++t) {
        int id = ids.at(t);
        bool found = false;
        for (auto& it : *v.lhs) {
            if (it.is_bracket() && it.idx == id) {
                v = {&it.body, nullptr};
                found = true;
                break;
            }
        }
        if (found) continue;
        if (v.rhs && v.rhs->is_bracket() && v.rhs->idx == id) {
            v = {&v.rhs->body->lhs, &v.rhs->body->rhs};
            continue;
        }
        throw RealiserError(RealiserError::MalformedStep, "premise lacks bracket " + std::to_string(id));
    }
    return v;
}

Fm level_fm(const LevelView& v) { return v.rhs ? fm(Sequent{*v.lhs, *v.rhs}) : fm_lhs(*v.lhs); }

const LItem* find_item(const Lhs& l, int idx) {
    for (auto& it : l)
        if (it.is_bracket() && it.idx == idx) return &it;
    return nullptr;
}

class Node {
   public:
    Node(ProofBuilder& b, const Derivation& d, const std::vector<PremiseResult>& p) : b_(b), d_(d), p_(p) {}

    StepResult run();

   private:
    // state
    ProofBuilder& b_;
    const Derivation& d_;
    const std::vector<PremiseResult>& p_;
    Expansion ex_;
    Realisation r_;
    Subst sigma_;
    std::vector<int> slots_;
    std::map<int, std::vector<int>> mslots_;  // level -> merge cert slots
    // geometry
    size_t k_ = 0, S_ = 0, L_ = 0;
    std::vector<int> ids_;
    std::vector<LevelView> cl_;
    std::vector<std::vector<LevelView>> pl_;

    void apply(const Subst& t) {
        if (t.empty()) return;
        sigma_ = t.after(sigma_);
        r_ = subst_positive(t, r_);
        for (auto& s : slots_)
            if (s >= 0) s = b_.subst(t, s);
    }
    int reg(int step) {
        slots_.push_back(step);
        return static_cast<int>(slots_.size()) - 1;
    }
    int at(int slot) const { return slots_.at(slot); }
    JFm R(const Fm& f) const { return apply_realisation(r_, f); }
    JFm P(size_t i, const Fm& f) const { return sigma_.apply(apply_realisation(p_[i].r, f)); }
    Tm Pt(size_t i, int idx) const {
        auto it = p_[i].r.find(idx);
        if (it == p_[i].r.end()) internal("premise realisation lacks index " + std::to_string(idx));
        return sigma_.apply(it->second);
    }
    const LevelView& pl(size_t i, size_t depth) const {
        const LevelView& v = pl_.at(i).at(depth);
        if (!v.lhs) throw RealiserError(RealiserError::MalformedStep, "premise level missing");
        return v;
    }
    std::vector<int> lem(size_t level) const {
        std::vector<int> out;
        auto it = mslots_.find(static_cast<int>(level));
        if (it == mslots_.end()) return out;
        for (int s : it->second)
            if (at(s) >= 0) out.push_back(at(s));
        return out;
    }
    int glue(const JFm& goal, std::vector<int> lemmas) {
        lemmas.erase(std::remove(lemmas.begin(), lemmas.end(), -1), lemmas.end());
        return b_.derive(goal, lemmas);
    }
    JFm spine_goal(size_t j) const {
        JFm g = R(level_fm(cl_[j]));
        for (size_t i = k_; i-- > 0;) g = jimp(P(i, level_fm(pl(i, j))), g);
        return g;
    }
    JFm lhs_goal(size_t j) const {
        JFm q;
        if (k_ == 0) q = jbot();
        else {
            q = P(k_ - 1, fm_lhs(*pl(k_ - 1, j).lhs));
            for (size_t i = k_ - 1; i-- > 0;) q = jor(P(i, fm_lhs(*pl(i, j).lhs)), q);
        }
        return jimp(R(fm_lhs(*cl_[j].lhs)), q);
    }
    static bool trivial(const JFm& g) { return g->op == JOp::Imp && eq(g->l, g->r); }

    void init();
    void merge_phase();
    std::optional<int> local_left();
    std::optional<int> chain_step(size_t d, std::optional<int> link);
    std::optional<int> spine_convert(std::optional<int> lhs_link);
    std::optional<int> local_right();
    std::optional<int> local_imp_ls();
    const LItem& citem(size_t level, size_t i) const { return cl_[level].lhs->at(i); }
};

bool is_left_rule(Rule r) {
    switch (r) {
        case Rule::BotL:
        case Rule::AndL:
        case Rule::OrL:
        case Rule::DiaL:
        case Rule::TL:
        case Rule::BoxLDia:
        case Rule::FourLDia:
        case Rule::Contr:
            return true;
        default:
            return false;
    }
}

void Node::init() {
    const Sequent& g = d_.conclusion;
    const Position& pos = d_.principal;
    k_ = p_.size();
    ex_ = k_ ? matched_expansion(d_) : Expansion{};
    L_ = pos.path.size();
    S_ = spine_length(g, pos.path);
    // Conclusion levels and bracket ids along the path.
    LevelView v{&g.lhs, &g.rhs};
    cl_.push_back(v);
    for (size_t t = 0; t < L_; ++t) {
        int step = pos.path[t];
        if (step == static_cast<int>(v.lhs->size())) {
            ids_.push_back(v.rhs->idx);
            v = {&v.rhs->body->lhs, &v.rhs->body->rhs};
        } else {
            const LItem& it = v.lhs->at(step);
            ids_.push_back(it.idx);
            v = {&it.body, nullptr};
        }
        cl_.push_back(v);
    }
    for (size_t i = 0; i < k_; ++i) {
        std::vector<int> pid = ids_;
        if (d_.rule == Rule::ImpLS && i == 0)
            for (size_t t = S_; t < L_; ++t) pid[t] = ex_.reindex.at(ids_[t]);
        std::vector<LevelView> lv;
        for (size_t t = 0; t <= L_; ++t) {
            try {
                lv.push_back(find_level(d_.premises[i].conclusion, pid, t));
            } catch (const RealiserError&) {
                lv.push_back({nullptr, nullptr});
            }
        }
        pl_.push_back(lv);
    }
    // Carried entries, recipe for fresh ones.
    for (int i : ann(g)) {
        if (!pos_idx(i)) {
            r_[i] = forced_var(i);
            continue;
        }
        Tm t;
        for (size_t q = 0; q < k_ && !t; ++q) {
            auto it = p_[q].r.find(i);
            if (it != p_[q].r.end()) t = it->second;
        }
        r_[i] = t ? t : recipe_term(i);
    }
}

void Node::merge_phase() {
    if (k_ != 2) return;
    const Position& pos = d_.principal;
    std::vector<std::pair<Fm, bool>> items;
    std::vector<int> level_of;
    auto add_level = [&](size_t lvl, std::set<int> skip, bool with_rhs) {
        const Lhs& l = *cl_[lvl].lhs;
        for (size_t i = 0; i < l.size(); ++i) {
            if (skip.count(static_cast<int>(i))) continue;
            items.push_back({fm(l[i]), false});
            level_of.push_back(static_cast<int>(lvl));
        }
        if (with_rhs) {
            items.push_back({fm(*cl_[lvl].rhs), true});
            level_of.push_back(static_cast<int>(lvl));
        }
    };
    for (size_t j = 0; j < S_; ++j) add_level(j, {}, false);
    switch (d_.rule) {
        case Rule::AndR:
            add_level(S_, {}, false);
            break;
        case Rule::OrL:
            for (size_t j = S_; j <= L_; ++j) {
                std::set<int> skip = {j == L_ ? pos.items.at(0) : pos.path.at(j)};
                add_level(j, skip, j == S_);
            }
            break;
        case Rule::ImpLS:
            for (size_t j = S_; j <= L_; ++j) {
                std::set<int> skip = {j == L_ ? pos.items.at(0) : pos.path.at(j)};
                if (j == S_) skip.insert(pos.items.begin() + 1, pos.items.end());
                add_level(j, skip, false);
            }
            break;
        default:
            throw RealiserError(RealiserError::MalformedStep, "unexpected two-premise rule " + rule_name(d_.rule));
    }
    MergeResult m = merge_items(b_, items, p_[0].r, p_[1].r);
    apply(m.sigma);
    for (auto& [i, t] : m.r) r_[i] = t;
    for (size_t j = 0; j < items.size(); ++j)
        for (int c : m.certs[j]) mslots_[level_of[j]].push_back(reg(c));
}

std::optional<int> Node::local_left() {
    const Position& pos = d_.principal;
    const auto& it = pos.items;
    size_t l = L_;
    switch (d_.rule) {
        case Rule::BotL:
            return reg(glue(lhs_goal(l), {}));
        case Rule::AndL:
        case Rule::DiaL:
        case Rule::OrL: {
            JFm g = lhs_goal(l);
            if (k_ == 1 && trivial(g)) return std::nullopt;
            return reg(glue(g, lem(l)));
        }
        case Rule::TL: {
            Fm f = citem(l, it.at(0)).f;
            JFm a = R(f->l);
            int ax = b_.axiom(Schema::JtBox, jimp(just(forced_var(f->idx), a), a));
            return reg(glue(lhs_goal(l), {ax}));
        }
        case Rule::BoxLDia:
        case Rule::FourLDia: {
            bool four = d_.rule == Rule::FourLDia;
            Fm f = citem(l, it.at(0)).f;
            const LItem& br = citem(l, it.at(1));
            const LItem* pbr = find_item(*pl(0, l).lhs, br.idx);
            if (!pbr) throw RealiserError(RealiserError::MalformedStep, "premise lacks the diamond bracket");
            Tm x = forced_var(f->idx);
            Tm a = forced_var(br.idx);
            JFm ra = R(f->l);
            JFm bc = R(fm_lhs(br.body));
            JFm bp = P(0, fm_lhs(pbr->body));
            std::vector<int> lemmas;
            JFm body = jimp(bc, bp);
            Tm t;
            int ls;
            if (!four) {
                int fs = glue(jimp(ra, body), {});
                std::tie(t, ls) = b_.lift(fs, {x});
            } else {
                JFm xa = just(x, ra);
                int fs = glue(jimp(xa, body), {});
                std::tie(t, ls) = b_.lift(fs, {bang(x)});
                lemmas.push_back(b_.axiom(Schema::J4Box, jimp(xa, just(bang(x), xa))));
            }
            lemmas.push_back(ls);
            lemmas.push_back(b_.axiom(Schema::Jk2, jimp(just(t, body), jimp(sat(a, bc), sat(prop(t, a), bp)))));
            Subst th;
            th.m[var_of(br.idx)] = prop(t, a);
            apply(th);
            return reg(glue(lhs_goal(l), lemmas));
        }
        case Rule::Contr: {
            Subst tau;
            for (auto& m : ex_.copies)
                for (auto& [o, c] : m)
                    if (!pos_idx(o)) tau.m[var_of(c)] = forced_var(o);
            apply(tau);
            std::vector<std::pair<Fm, bool>> items;
            std::set<int> idx;
            for (int i : it) {
                Fm f = fm(citem(l, i));
                items.push_back({f, false});
                auto a = ann(f);
                idx.insert(a.begin(), a.end());
            }
            Realisation rho[2];
            for (int c = 0; c < 2; ++c)
                for (int i : idx) rho[c][i] = pos_idx(i) ? Pt(0, ex_.copies[c].at(i)) : forced_var(i);
            MergeResult m = merge_items(b_, items, rho[0], rho[1]);
            apply(m.sigma);
            for (auto& [i, t] : m.r) r_[i] = t;
            std::vector<int> lemmas;
            for (auto& c : m.certs) lemmas.insert(lemmas.end(), c.begin(), c.end());
            JFm g = lhs_goal(l);
            if (trivial(g)) return std::nullopt;
            return reg(glue(g, lemmas));
        }
        default:
            internal("not a left rule");
    }
}

std::optional<int> Node::chain_step(size_t d, std::optional<int> link) {
    if (!link) return std::nullopt;
    int kidx = ids_.at(d - 1);
    Tm a = forced_var(kidx);
    JFm lf = b_.formula(at(*link));  // r(Z) -> Q
    JFm rz = lf->l, q = lf->r;
    auto [s, ss] = b_.internalise(at(*link));
    Tm sa = prop(s, a);
    std::vector<int> lemmas;
    JFm ax = jimp(just(s, lf), jimp(sat(a, rz), sat(sa, q)));
    lemmas.push_back(b_.mp(b_.axiom(Schema::Jk2, ax), ss));
    if (k_ == 2) lemmas.push_back(b_.axiom(Schema::Jk3, jimp(sat(sa, q), jor(sat(sa, q->l), sat(sa, q->r)))));
    if (k_ == 0) lemmas.push_back(b_.axiom(Schema::Jk5, jimp(sat(sa, q), q)));
    if (k_ >= 1) {
        Subst th;
        th.m[var_of(kidx)] = sa;
        apply(th);
    }
    auto ml = lem(d - 1);
    lemmas.insert(lemmas.end(), ml.begin(), ml.end());
    return reg(glue(lhs_goal(d - 1), lemmas));
}

std::optional<int> Node::spine_convert(std::optional<int> lhs_link) {
    if (!lhs_link) return std::nullopt;
    std::vector<int> lemmas = lem(S_);
    lemmas.push_back(at(*lhs_link));
    return reg(glue(spine_goal(S_), lemmas));
}

std::optional<int> Node::local_right() {
    const Position& pos = d_.principal;
    const auto& it = pos.items;
    size_t s = S_;
    const LevelView& c = cl_[s];
    switch (d_.rule) {
        case Rule::Id:
            return reg(glue(spine_goal(s), {}));
        case Rule::AndR:
        case Rule::OrR1:
        case Rule::OrR2:
        case Rule::ImpR:
        case Rule::BoxR: {
            JFm g = spine_goal(s);
            if (k_ == 1 && trivial(g)) return std::nullopt;
            return reg(glue(g, lem(s)));
        }
        case Rule::TR: {
            Fm f = c.rhs->f;
            JFm a = R(f->l);
            int ax = b_.axiom(Schema::JtDia, jimp(a, sat(r_.at(f->idx), a)));
            return reg(glue(spine_goal(s), {ax}));
        }
        case Rule::DiaR:
        case Rule::FourR: {
            Fm f = c.rhs->f;
            const LItem& br = citem(s, it.at(1));
            Tm a = forced_var(br.idx);
            const LevelView& pv = pl(0, s);
            if (!pv.rhs || !pv.rhs->is_bracket()) throw RealiserError(RealiserError::MalformedStep, "premise lacks box");
            Tm sn = Pt(0, pv.rhs->idx);
            JFm bp = P(0, fm(*pv.rhs->body));
            std::vector<int> lemmas;
            Tm sst = sn;
            JFm body = bp;
            if (br.body.empty()) {
                JFm top = R(mk_top());
                int fs = glue(jimp(bp, jimp(top, bp)), {});
                auto [s2, ls] = b_.lift(fs, {sn});
                lemmas.push_back(ls);
                sst = s2;
                body = jimp(top, bp);
            }
            JFm dd = body->l, aa = body->r;
            Tm mu = prop(sst, a);
            lemmas.push_back(b_.axiom(Schema::Jk2, jimp(just(sst, body), jimp(sat(a, dd), sat(mu, aa)))));
            if (d_.rule == Rule::DiaR) {
                r_[f->idx] = mu;
            } else {
                lemmas.push_back(b_.axiom(Schema::J4Dia, jimp(sat(mu, aa), aa)));
            }
            return reg(glue(spine_goal(s), lemmas));
        }
        case Rule::BoxLBr:
        case Rule::FourLBr: {
            bool four = d_.rule == Rule::FourLBr;
            Fm f = citem(s, it.at(0)).f;
            Tm x = forced_var(f->idx);
            int n = c.rhs->idx;
            const LevelView& pv = pl(0, s);
            JFm ip = P(0, fm(*pv.rhs->body));
            JFm ic = R(fm(*c.rhs->body));
            Tm sn = Pt(0, n);
            JFm ra = R(f->l);
            std::vector<int> lemmas;
            Tm t;
            int ls;
            if (!four) {
                int fs = glue(jimp(ip, jimp(ra, ic)), {});
                std::tie(t, ls) = b_.lift(fs, {sn, x});
            } else {
                JFm xa = just(x, ra);
                int fs = glue(jimp(ip, jimp(xa, ic)), {});
                std::tie(t, ls) = b_.lift(fs, {sn, bang(x)});
                lemmas.push_back(b_.axiom(Schema::J4Box, jimp(xa, just(bang(x), xa))));
            }
            lemmas.push_back(ls);
            r_[n] = t;
            return reg(glue(spine_goal(s), lemmas));
        }
        case Rule::Upd: {
            int n = c.rhs->idx;
            const LevelView& pv = pl(0, s);
            const LItem* nb = find_item(*pv.lhs, ex_.fresh);
            if (!nb) throw RealiserError(RealiserError::MalformedStep, "premise lacks the new diamond bracket");
            Tm a = forced_var(ex_.fresh);
            JFm l1 = P(0, fm_lhs(nb->body));
            JFm bp = P(0, fm(*pv.rhs->body));
            Tm sn = Pt(0, n);
            Tm up = update(a, sn);
            int j4 = b_.axiom(Schema::Jk4, jimp(jimp(sat(a, l1), just(sn, bp)), just(up, jimp(l1, bp))));
            JFm ic = R(fm(*c.rhs->body));
            int fs = glue(jimp(jimp(l1, bp), ic), {});
            auto [t, ls] = b_.lift(fs, {up});
            r_[n] = t;
            return reg(glue(spine_goal(s), {j4, ls}));
        }
        default:
            internal("not a right rule");
    }
}

std::optional<int> Node::local_imp_ls() {
    int m = -1;  // slot of the lemma from the level below
    for (size_t d = L_; d > S_; --d) {
        JFm h = P(0, level_fm(pl(0, d)));
        JFm z = R(fm_lhs(*cl_[d].lhs));
        JFm z2 = P(1, fm_lhs(*pl(1, d).lhs));
        std::vector<int> lemmas = lem(d);
        if (m >= 0) lemmas.push_back(at(m));
        int fs = glue(jimp(h, jimp(z, z2)), lemmas);
        int kd = ids_.at(d - 1);
        Tm sd = Pt(0, ex_.reindex.at(kd));
        auto [t, ls] = b_.lift(fs, {sd});
        Tm a = forced_var(kd);
        Tm ta = prop(t, a);
        int ax = b_.axiom(Schema::Jk2, jimp(just(t, jimp(z, z2)), jimp(sat(a, z), sat(ta, z2))));
        Subst th;
        th.m[var_of(kd)] = ta;
        apply(th);
        m = reg(glue(jimp(just(sd, h), jimp(sat(a, z), sat(ta, z2))), {ls, ax}));
    }
    std::vector<int> lemmas = lem(S_);
    if (m >= 0) lemmas.push_back(at(m));
    return reg(glue(spine_goal(S_), lemmas));
}

StepResult Node::run() {
    init();
    if (d_.rule == Rule::ImpL)
        throw RealiserError(RealiserError::MalformedStep, "imp_l must be decomposed into upd and imp_l_s first");
    merge_phase();
    std::optional<int> link;
    if (d_.rule == Rule::ImpLS) {
        link = local_imp_ls();
    } else if (is_left_rule(d_.rule)) {
        auto l = local_left();
        for (size_t dd = L_; dd > S_; --dd) l = chain_step(dd, l);
        link = spine_convert(l);
    } else {
        if (L_ != S_) throw RealiserError(RealiserError::MalformedStep, "right rule inside a diamond bracket");
        link = local_right();
    }
    for (size_t j = S_; j-- > 0;) {
        if (!link) continue;
        int n = cl_[j].rhs->idx;
        std::vector<Tm> taus;
        for (size_t i = 0; i < k_; ++i) taus.push_back(Pt(i, n));
        auto [t, st] = b_.lift(at(*link), taus);
        r_[n] = t;
        std::vector<int> lemmas = lem(j);
        lemmas.push_back(st);
        link = reg(glue(spine_goal(j), lemmas));
    }
    StepResult res;
    JFm goal = R(fm(d_.conclusion));
    res.sigmas.assign(k_, sigma_);
    if (!link) {
        res.theorem = b_.subst(sigma_, p_[0].theorem);
        res.cert = b_.derive(jimp(goal, goal));
    } else {
        res.cert = at(*link);
        int thm = res.cert;
        for (size_t i = 0; i < k_; ++i) thm = b_.mp(thm, b_.subst(sigma_, p_[i].theorem));
        res.theorem = thm;
    }
    if (!eq(b_.formula(res.theorem), goal))
        internal("step " + rule_name(d_.rule) + " proved " + to_string(b_.formula(res.theorem)) + " instead of " +
                 to_string(goal));
    std::set<int> pidx;
    for (auto& p : d_.premises) {
        auto a = ann(p.conclusion);
        pidx.insert(a.begin(), a.end());
    }
    auto nv = negvar_of(pidx);
    for (auto& v : sigma_.dom())
        if (!nv.count(v)) internal("substitution touches " + to_string(v) + " outside the premises' negative variables");
    res.r = restrict(r_, ann(d_.conclusion));
    return res;
}

void check_no_impl(const Derivation& d) {
    if (d.rule == Rule::ImpL)
        throw RealiserError(RealiserError::MalformedStep, "imp_l must be decomposed into upd and imp_l_s first");
    for (auto& p : d.premises) check_no_impl(p);
}

}  // namespace

StepResult realise_step(ProofBuilder& b, const Derivation& d, const std::vector<PremiseResult>& premises) {
    if (premises.size() != d.premises.size())
        throw RealiserError(RealiserError::MalformedStep, "premise result count mismatch");
    return Node(b, d, premises).run();
}

StepResult realise_right_step(ProofBuilder& b, const Derivation& d, const std::vector<PremiseResult>& premises) {
    if (d.premises.empty() || d.rule == Rule::ImpLS || is_left_rule(d.rule))
        throw RealiserError(RealiserError::MalformedStep, rule_name(d.rule) + " is not a right rule");
    return realise_step(b, d, premises);
}

StepResult realise_left_step(ProofBuilder& b, const Derivation& d, const std::vector<PremiseResult>& premises) {
    if (d.premises.empty() || (d.rule != Rule::ImpLS && !is_left_rule(d.rule)))
        throw RealiserError(RealiserError::MalformedStep, rule_name(d.rule) + " is not a left rule");
    return realise_step(b, d, premises);
}

StepResult realise_leaf(ProofBuilder& b, const Derivation& d) {
    if (!d.premises.empty() || (d.rule != Rule::Id && d.rule != Rule::BotL))
        throw RealiserError(RealiserError::NotAxiomatic, "not an axiomatic sequent");
    return Node(b, d, {}).run();
}

Realised realise_proof(const Derivation& d, Logic l, int glue_budget) {
    check_no_impl(d);
    ProofBuilder b(l, glue_budget);
    std::function<PremiseResult(const Derivation&)> go = [&](const Derivation& n) -> PremiseResult {
        std::vector<PremiseResult> ps;
        for (auto& p : n.premises) ps.push_back(go(p));
        StepResult s = realise_step(b, n, ps);
        return {s.r, s.theorem};
    };
    PremiseResult top = go(d);
    Realised out;
    out.r = top.r;
    out.formula = b.formula(top.theorem);
    out.certificate = b.extract(top.theorem);
    JFm checked = check(out.certificate);
    if (!eq(checked, out.formula)) internal("certificate proves a different formula");
    return out;
}

nlohmann::json to_json(const Realised& r) {
    nlohmann::json m = nlohmann::json::object();
    for (auto& [k, t] : r.r) m[std::to_string(k)] = to_string(t);
    return {{"realisation", m}, {"formula", to_string(r.formula)}, {"certificate", to_json(r.certificate)}};
}

}  // namespace jreal
