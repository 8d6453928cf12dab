#include "jreal/nested.hpp"

#include <algorithm>

#include "jreal/parser.hpp"

namespace jreal {

LItem in(Fm f) {
    LItem i;
    i.f = std::move(f);
    return i;
}
LItem dia_br(Lhs body, int idx) {
    LItem i;
    i.idx = idx;
    i.body = std::move(body);
    return i;
}
RItem out(Fm f) {
    RItem r;
    r.f = std::move(f);
    return r;
}
RItem box_br(Sequent body, int idx) {
    RItem r;
    r.idx = idx;
    r.body = std::make_shared<const Sequent>(std::move(body));
    return r;
}
Sequent seq(Lhs lhs, RItem rhs) { return normalize(Sequent{std::move(lhs), std::move(rhs)}); }

namespace {
int cmp_int(int a, int b) { return a < b ? -1 : (a > b ? 1 : 0); }
}  // namespace

int compare(const LItem& a, const LItem& b, bool with_idx) {
    if (a.is_bracket() != b.is_bracket()) return a.is_bracket() ? 1 : -1;
    if (!a.is_bracket()) return compare(a.f, b.f, with_idx);
    int c = compare(a.body, b.body, with_idx);
    if (c || !with_idx) return c;
    return cmp_int(a.idx, b.idx);
}

int compare(const Lhs& a, const Lhs& b, bool with_idx) {
    if (a.size() != b.size()) return cmp_int(int(a.size()), int(b.size()));
    for (size_t i = 0; i < a.size(); ++i)
        if (int c = compare(a[i], b[i], with_idx)) return c;
    return 0;
}

int compare(const RItem& a, const RItem& b, bool with_idx) {
    if (a.is_bracket() != b.is_bracket()) return a.is_bracket() ? 1 : -1;
    if (!a.is_bracket()) return compare(a.f, b.f, with_idx);
    int c = compare(*a.body, *b.body, with_idx);
    if (c || !with_idx) return c;
    return cmp_int(a.idx, b.idx);
}

int compare(const Sequent& a, const Sequent& b, bool with_idx) {
    if (int c = compare(a.lhs, b.lhs, with_idx)) return c;
    return compare(a.rhs, b.rhs, with_idx);
}

void normalize(Lhs& l) {
    for (auto& i : l)
        if (i.is_bracket()) normalize(i.body);
    std::stable_sort(l.begin(), l.end(), [](const LItem& a, const LItem& b) {
        int c = compare(a, b, false);
        if (c) return c < 0;
        return compare(a, b, true) < 0;
    });
}

Sequent normalize(Sequent s) {
    normalize(s.lhs);
    if (s.rhs.is_bracket()) s.rhs.body = std::make_shared<const Sequent>(normalize(*s.rhs.body));
    return s;
}

Fm fm_lhs(const Lhs& l) {
    if (l.empty()) return mk_top();
    Fm acc = fm(l.back());
    for (size_t i = l.size() - 1; i-- > 0;) acc = mk_and(fm(l[i]), acc);
    return acc;
}

Fm fm(const LItem& i) { return i.is_bracket() ? mk_dia(fm_lhs(i.body), i.idx) : i.f; }
Fm fm(const RItem& r) { return r.is_bracket() ? mk_box(fm(*r.body), r.idx) : r.f; }
Fm fm(const Sequent& s) { return s.lhs.empty() ? fm(s.rhs) : mk_imp(fm_lhs(s.lhs), fm(s.rhs)); }

std::set<int> ann(const Lhs& l) {
    std::set<int> out;
    for (auto& i : l) {
        if (i.is_bracket()) {
            if (i.idx >= 0) out.insert(i.idx);
            auto sub = ann(i.body);
            out.insert(sub.begin(), sub.end());
        } else {
            auto sub = ann(i.f);
            out.insert(sub.begin(), sub.end());
        }
    }
    return out;
}

std::set<int> ann(const Sequent& s) {
    auto out = ann(s.lhs);
    if (s.rhs.is_bracket()) {
        if (s.rhs.idx >= 0) out.insert(s.rhs.idx);
        auto sub = ann(*s.rhs.body);
        out.insert(sub.begin(), sub.end());
    } else {
        auto sub = ann(s.rhs.f);
        out.insert(sub.begin(), sub.end());
    }
    return out;
}

Lhs erase(const Lhs& l) {
    Lhs out;
    for (auto& i : l) out.push_back(i.is_bracket() ? dia_br(erase(i.body)) : in(erase(i.f)));
    normalize(out);
    return out;
}

Sequent erase(const Sequent& s) {
    RItem r = s.rhs.is_bracket() ? box_br(erase(*s.rhs.body)) : out(erase(s.rhs.f));
    return seq(erase(s.lhs), r);
}

LevelView level_at(const Sequent& s, const std::vector<int>& path) {
    LevelView v{&s.lhs, &s.rhs};
    for (int k : path) {
        if (k >= 0 && size_t(k) < v.lhs->size()) {
            const LItem& it = (*v.lhs)[k];
            if (!it.is_bracket()) throw PositionError("path step selects a formula");
            v = {&it.body, nullptr};
        } else if (v.rhs && size_t(k) == v.lhs->size() && v.rhs->is_bracket()) {
            const Sequent& b = *v.rhs->body;
            v = {&b.lhs, &b.rhs};
        } else {
            throw PositionError("path step out of range");
        }
    }
    return v;
}

namespace {
void edit_rec(Lhs& lhs, RItem* rhs, const std::vector<int>& path, size_t i, std::vector<MutLevel>& levels,
              const MultiEdit& fn) {
    levels.push_back({&lhs, rhs});
    if (i == path.size()) {
        fn(levels);
        return;
    }
    int k = path[i];
    if (k >= 0 && size_t(k) < lhs.size()) {
        if (!lhs[k].is_bracket()) throw PositionError("path step selects a formula");
        edit_rec(lhs[k].body, nullptr, path, i + 1, levels, fn);
    } else if (rhs && size_t(k) == lhs.size() && rhs->is_bracket()) {
        Sequent b = *rhs->body;
        edit_rec(b.lhs, &b.rhs, path, i + 1, levels, fn);
        rhs->body = std::make_shared<const Sequent>(std::move(b));
    } else {
        throw PositionError("path step out of range");
    }
}
}  // namespace

Sequent edit_levels(const Sequent& s, const std::vector<int>& path, const MultiEdit& fn, bool norm) {
    Sequent t = s;
    std::vector<MutLevel> levels;
    edit_rec(t.lhs, &t.rhs, path, 0, levels, fn);
    return norm ? normalize(std::move(t)) : t;
}

Sequent edit_level(const Sequent& s, const std::vector<int>& path, const LevelEdit& fn) {
    return edit_levels(s, path, [&](std::vector<MutLevel>& lv) { fn(*lv.back().lhs, lv.back().rhs); });
}

size_t spine_length(const Sequent& s, const std::vector<int>& path) {
    LevelView v{&s.lhs, &s.rhs};
    size_t n = 0;
    for (int k : path) {
        if (!v.rhs || size_t(k) != v.lhs->size()) break;
        if (!v.rhs->is_bracket()) throw PositionError("path step out of range");
        v = {&v.rhs->body->lhs, &v.rhs->body->rhs};
        ++n;
    }
    return n;
}

Sequent fill_input(const Sequent& s, const std::vector<int>& path, const Lhs& payload) {
    return edit_level(s, path, [&](Lhs& lhs, RItem*) { lhs.insert(lhs.end(), payload.begin(), payload.end()); });
}

Sequent fill_output(const Sequent& s, const std::vector<int>& path, const Sequent& payload) {
    return edit_level(s, path, [&](Lhs& lhs, RItem* rhs) {
        if (!rhs) throw PositionError("output hole must sit on the output spine");
        // The level's own RHS is the hole; the payload supplies the new one.
        lhs.insert(lhs.end(), payload.lhs.begin(), payload.lhs.end());
        *rhs = payload.rhs;
    });
}

Lhs extract_lhs(const Sequent& s, const std::vector<int>& path) { return *level_at(s, path).lhs; }

namespace {
int flip_index(int old, int residue, Counter* c, std::map<int, int>& reindex) {
    if (old < 0 || !c) return -1;
    int n = c->fresh(residue);
    reindex[old] = n;
    return n;
}

// Π↓ as LHS material.
void prune_rhs(const RItem& r, Lhs& into, Counter* c, std::map<int, int>& reindex) {
    if (!r.is_bracket()) return;
    Lhs body = r.body->lhs;
    prune_rhs(r.body->rhs, body, c, reindex);
    into.push_back(dia_br(std::move(body), flip_index(r.idx, 3, c, reindex)));
}

// Flip the diamond chain below a spine level into box brackets ending in payload.
RItem flip_chain(const Lhs& lhs, const std::vector<int>& chain, size_t i, Lhs& kept, const RItem& payload,
                 Counter* c, std::map<int, int>& reindex) {
    kept = lhs;
    if (i == chain.size()) return payload;
    int k = chain[i];
    if (k < 0 || size_t(k) >= lhs.size() || !lhs[k].is_bracket()) throw PositionError("bad diamond chain");
    const LItem& br = lhs[k];
    kept.erase(kept.begin() + k);
    int idx = flip_index(br.idx, 0, c, reindex);
    Sequent inner;
    inner.rhs = flip_chain(br.body, chain, i + 1, inner.lhs, payload, c, reindex);
    return box_br(std::move(inner), idx);
}
}  // namespace

Pruned prune_fill(const Sequent& s, const std::vector<int>& path, const RItem& payload, Counter* counter,
                  bool drop_pi, const std::function<void(Lhs&)>& hole_edit) {
    size_t sp = spine_length(s, path);
    std::vector<int> spine(path.begin(), path.begin() + sp);
    std::vector<int> chain(path.begin() + sp, path.end());
    Sequent t = s;
    if (hole_edit) t = edit_levels(t, path, [&](std::vector<MutLevel>& lv) { hole_edit(*lv.back().lhs); }, false);
    Pruned res;
    // Flipped indices are allocated in traversal order: Π↓ first, then the chain.
    res.seq = edit_levels(t, spine, [&](std::vector<MutLevel>& lv) {
        Lhs& lhs = *lv.back().lhs;
        RItem* rhs = lv.back().rhs;
        Lhs pi_down;
        if (!drop_pi) prune_rhs(*rhs, pi_down, counter, res.reindex);
        Lhs kept;
        RItem nr = flip_chain(lhs, chain, 0, kept, payload, counter, res.reindex);
        kept.insert(kept.end(), pi_down.begin(), pi_down.end());
        lhs = std::move(kept);
        *rhs = nr;
    });
    return res;
}

std::string to_string(const Lhs& l) {
    std::string out;
    for (size_t i = 0; i < l.size(); ++i) {
        if (i) out += ", ";
        if (l[i].is_bracket()) {
            out += "<" + to_string(l[i].body) + ">";
            if (l[i].idx >= 0) out += std::to_string(l[i].idx);
        } else {
            out += "(" + to_string(l[i].f) + ")*";
        }
    }
    return out;
}

std::string to_string(const Sequent& s) {
    std::string out = to_string(s.lhs);
    if (!out.empty()) out += ", ";
    if (s.rhs.is_bracket()) {
        out += "[" + to_string(*s.rhs.body) + "]";
        if (s.rhs.idx >= 0) out += std::to_string(s.rhs.idx);
    } else {
        out += "(" + to_string(s.rhs.f) + ")o";
    }
    return out;
}

namespace {
nlohmann::json lhs_json(const Lhs& l) {
    nlohmann::json a = nlohmann::json::array();
    for (auto& i : l) {
        nlohmann::json j;
        if (i.is_bracket()) {
            j["dia"] = lhs_json(i.body);
            if (i.idx >= 0) j["n"] = i.idx;
        } else {
            j["f"] = to_string(i.f);
        }
        a.push_back(j);
    }
    return a;
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (auto* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw std::invalid_argument("unknown key '" + it.key() + "'");
    }
}

int read_idx(const nlohmann::json& j) {
    if (!j.contains("n")) return -1;
    int n = j.at("n").get<int>();
    if (n < 0) throw std::invalid_argument("negative bracket index");
    return n;
}

Lhs lhs_from_json(const nlohmann::json& a) {
    if (!a.is_array()) throw std::invalid_argument("expected an LHS array");
    Lhs l;
    for (auto& j : a) {
        check_keys(j, {"f", "dia", "n"});
        if (j.contains("f")) {
            if (j.contains("dia") || j.contains("n")) throw std::invalid_argument("malformed LHS item");
            l.push_back(in(parse_formula(j.at("f").get<std::string>())));
        } else if (j.contains("dia")) {
            int n = read_idx(j);
            if (n >= 0 && n % 4 != 3) throw std::invalid_argument("diamond bracket index must be 3 mod 4");
            l.push_back(dia_br(lhs_from_json(j.at("dia")), n));
        } else {
            throw std::invalid_argument("malformed LHS item");
        }
    }
    return l;
}
}  // namespace

nlohmann::json to_json(const Sequent& s) {
    nlohmann::json j;
    j["lhs"] = lhs_json(s.lhs);
    nlohmann::json r;
    if (s.rhs.is_bracket()) {
        r["box"] = to_json(*s.rhs.body);
        if (s.rhs.idx >= 0) r["n"] = s.rhs.idx;
    } else {
        r["f"] = to_string(s.rhs.f);
    }
    j["rhs"] = r;
    return j;
}

Sequent sequent_from_json(const nlohmann::json& j) {
    check_keys(j, {"lhs", "rhs"});
    Sequent s;
    s.lhs = lhs_from_json(j.at("lhs"));
    const auto& r = j.at("rhs");
    check_keys(r, {"f", "box", "n"});
    if (r.contains("f")) {
        if (r.contains("box") || r.contains("n")) throw std::invalid_argument("malformed RHS");
        s.rhs = out(parse_formula(r.at("f").get<std::string>()));
    } else if (r.contains("box")) {
        int n = read_idx(r);
        if (n >= 0 && n % 4 != 0) throw std::invalid_argument("box bracket index must be 0 mod 4");
        s.rhs = box_br(sequent_from_json(r.at("box")), n);
    } else {
        throw std::invalid_argument("malformed RHS");
    }
    return normalize(std::move(s));
}

}  // namespace jreal
