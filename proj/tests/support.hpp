#pragma once
// Random generators shared by the unit tests and the acceptance runner.

#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "jreal/syntax.hpp"

namespace jreal::testing {

using Rng = std::mt19937;

inline int pick(Rng& g, int n) { return static_cast<int>(g() % static_cast<unsigned>(n)); }

// Modal formula over p, q, #; at most max_mod modalities.
inline Fm random_formula(Rng& g, int depth, int& mods, int max_mod) {
    int c = pick(g, depth <= 0 ? 3 : 9);
    switch (c) {
        case 0:
            return mk_atom("p");
        case 1:
            return mk_atom("q");
        case 2:
            return pick(g, 3) == 0 ? mk_bot() : mk_atom("p");
        case 3:
            return mk_and(random_formula(g, depth - 1, mods, max_mod), random_formula(g, depth - 1, mods, max_mod));
        case 4:
            return mk_or(random_formula(g, depth - 1, mods, max_mod), random_formula(g, depth - 1, mods, max_mod));
        case 5:
        case 6:
            return mk_imp(random_formula(g, depth - 1, mods, max_mod), random_formula(g, depth - 1, mods, max_mod));
        case 7:
            if (mods < max_mod) {
                ++mods;
                return mk_box(random_formula(g, depth - 1, mods, max_mod));
            }
            return random_formula(g, depth - 1, mods, max_mod);
        default:
            if (mods < max_mod) {
                ++mods;
                return mk_dia(random_formula(g, depth - 1, mods, max_mod));
            }
            return random_formula(g, depth - 1, mods, max_mod);
    }
}

// Terms over the given variables plus constants and reserved variables.
struct TermPool {
    std::vector<int> pvars, svars;
    int consts = 4, reserved = 3;
};

inline Tm random_sat(Rng& g, int depth, const TermPool& pool);

inline Tm random_proof_term(Rng& g, int depth, const TermPool& pool) {
    int c = pick(g, depth <= 0 ? 3 : 7);
    switch (c) {
        case 0:
            return cnst(pick(g, pool.consts));
        case 1:
            return rpvar(pick(g, pool.reserved));
        case 2:
            if (!pool.pvars.empty()) return pvar(pool.pvars[pick(g, static_cast<int>(pool.pvars.size()))]);
            return cnst(pick(g, pool.consts));
        case 3:
            return sum(random_proof_term(g, depth - 1, pool), random_proof_term(g, depth - 1, pool));
        case 4:
            return app(random_proof_term(g, depth - 1, pool), random_proof_term(g, depth - 1, pool));
        case 5:
            return bang(random_proof_term(g, depth - 1, pool));
        default:
            return update(random_sat(g, depth - 1, pool), random_proof_term(g, depth - 1, pool));
    }
}

inline Tm random_sat(Rng& g, int depth, const TermPool& pool) {
    int c = pick(g, depth <= 0 ? 2 : 4);
    switch (c) {
        case 0:
            return rsvar(pick(g, pool.reserved));
        case 1:
            if (!pool.svars.empty()) return svar(pool.svars[pick(g, static_cast<int>(pool.svars.size()))]);
            return rsvar(pick(g, pool.reserved));
        case 2:
            return uni(random_sat(g, depth - 1, pool), random_sat(g, depth - 1, pool));
        default:
            return prop(random_proof_term(g, depth - 1, pool), random_sat(g, depth - 1, pool));
    }
}

// Justification formula over p, q with random modal leaves.
inline JFm random_jformula(Rng& g, int depth, const TermPool& pool) {
    int c = pick(g, depth <= 0 ? 3 : 8);
    switch (c) {
        case 0:
            return jatom("p");
        case 1:
            return jatom("q");
        case 2:
            return pick(g, 4) == 0 ? jbot() : jatom("p");
        case 3:
            return jand(random_jformula(g, depth - 1, pool), random_jformula(g, depth - 1, pool));
        case 4:
            return jor(random_jformula(g, depth - 1, pool), random_jformula(g, depth - 1, pool));
        case 5:
            return jimp(random_jformula(g, depth - 1, pool), random_jformula(g, depth - 1, pool));
        case 6:
            return just(random_proof_term(g, 1, pool), random_jformula(g, depth - 1, pool));
        default:
            return sat(random_sat(g, 1, pool), random_jformula(g, depth - 1, pool));
    }
}

// Two realisations of a properly annotated A: negative indices forced,
// positive ones random. A positive modality never mentions the variables of
// the negative modalities above it.
inline Realisation random_realisation(Rng& g, const Fm& a) {
    Realisation r;
    std::function<void(const Fm&, std::vector<int>&)> go = [&](const Fm& f, std::vector<int>& above) {
        if (f->op == Op::Box || f->op == Op::Dia) {
            int i = f->idx;
            if (i % 2 == 1) {
                r[i] = forced_var(i);
            } else {
                TermPool pool;
                std::set<int> skip(above.begin(), above.end());
                for (int j : ann(a)) {
                    if (j % 2 == 0 || skip.count(j)) continue;
                    if (j % 4 == 1)
                        pool.pvars.push_back(j / 4);
                    else
                        pool.svars.push_back(j / 4);
                }
                r[i] = i % 4 == 0 ? random_proof_term(g, 2, pool) : random_sat(g, 2, pool);
            }
            above.push_back(i);
            go(f->l, above);
            above.pop_back();
            return;
        }
        if (f->l) go(f->l, above);
        if (f->r) go(f->r, above);
    };
    std::vector<int> above;
    go(a, above);
    return r;
}

// Residue-respecting substitution over vs (each variable kept with prob 1/2).
inline Subst random_subst(Rng& g, const std::set<Var>& vs) {
    Subst s;
    TermPool pool;
    for (auto& v : vs) {
        if (v.kind == 'x') pool.pvars.push_back(v.n);
        if (v.kind == 'a') pool.svars.push_back(v.n);
    }
    for (auto& v : vs) {
        if (pick(g, 2)) continue;
        bool proof = v.kind == 'x' || v.kind == 'y';
        s.m[v] = proof ? random_proof_term(g, 2, pool) : random_sat(g, 2, pool);
    }
    return s;
}

}  // namespace jreal::testing
