#pragma once

#include <array>
#include <optional>
#include <vector>

#include "jreal/calculus.hpp"
#include "jreal/jl_hilbert.hpp"
#include "jreal/nested.hpp"
#include "jreal/syntax.hpp"

namespace jreal {

class RealiserError : public std::runtime_error {
   public:
    enum Kind { IllegalUnion, IllegalCompose, NotAxiomatic, MalformedStep, Internal };
    RealiserError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
    Kind kind;
};

Realisation restrict(const Realisation& r, const std::set<int>& idx);
inline Realisation restrict(const Realisation& r, const Fm& a) { return restrict(r, ann(a)); }
// Overlap allowed on odd indices only (where both carry the forced variable).
Realisation union_real(const Realisation& r, const Realisation& r2);
// σ∘r; illegal when σ touches a negative variable of A.
Realisation compose(const Subst& s, const Realisation& r, const Fm& a);
// Leaf recipe over a set of indices.
Realisation recipe(const std::set<int>& idx);
// Positive entries of r get σ applied; negative entries stay forced.
Realisation subst_positive(const Subst& s, const Realisation& r);
Var var_of(int idx);  // the forced variable of a negative index

// Merging. Certificates are builder steps:
//   positive X:  σ(r_i(X)) -> r(X)
//   negative X:  r(X) -> σ(r_i(X))
// -1 stands for the identity (both sides syntactically equal).
struct SubCert {
    std::vector<int> path;  // into the merged formula (list index first for merge_items)
    bool positive;
    std::array<int, 2> cert;
};
struct MergeResult {
    Realisation r;
    Subst sigma;
    std::vector<std::array<int, 2>> certs;  // one per item
    std::vector<SubCert> all;               // every subformula when requested
};
MergeResult merge_items(ProofBuilder& b, const std::vector<std::pair<Fm, bool>>& items, const Realisation& r1,
                        const Realisation& r2, bool record_all = false);
inline MergeResult merge(ProofBuilder& b, const Fm& a, const Realisation& r1, const Realisation& r2,
                         bool record_all = true) {
    return merge_items(b, {{a, true}}, r1, r2, record_all);
}
// Merge over fm(Γ) (positive) and the LHS Λ (negative).
MergeResult merge_sequent(ProofBuilder& b, const Sequent& g, const Lhs& lam, const Realisation& r1,
                          const Realisation& r2);

// Result of one rule instance read top-down.
struct StepResult {
    Realisation r;
    std::vector<Subst> sigmas;  // one per premise
    int cert = -1;              // σ1 r1(Γ1) -> ... -> r(Γ)  (r(Γ) for leaves)
    int theorem = -1;           // r(Γ)
};

struct PremiseResult {
    Realisation r;
    int theorem;  // builder step proving r(fm(premise))
};

// One node: premises already realised. d must be annotated and checker-valid.
StepResult realise_step(ProofBuilder& b, const Derivation& d, const std::vector<PremiseResult>& premises);
StepResult realise_leaf(ProofBuilder& b, const Derivation& d);
// Same as realise_step, restricted to one rule family (MalformedStep otherwise).
StepResult realise_right_step(ProofBuilder& b, const Derivation& d, const std::vector<PremiseResult>& premises);
StepResult realise_left_step(ProofBuilder& b, const Derivation& d, const std::vector<PremiseResult>& premises);

struct Realised {
    Realisation r;
    JFm formula;
    JLProof certificate;
};
// d: annotated, decomposed (no imp_l), checker-valid in l.
Realised realise_proof(const Derivation& d, Logic l, int glue_budget = 2000);

nlohmann::json to_json(const Realised& r);

}  // namespace jreal
