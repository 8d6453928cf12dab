#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "jreal/calculus.hpp"
#include "jreal/syntax.hpp"

namespace jreal {

enum class Schema {
    K,
    S,
    AndI,
    AndE1,
    AndE2,
    OrI1,
    OrI2,
    OrE,
    BotE,
    Jk1,
    Jk2,
    Jk3,
    Jk4,
    Jk5,
    JSumL,
    JSumR,
    JUniL,
    JUniR,
    JtBox,
    JtDia,
    J4Box,
    J4Dia,
};
std::string schema_name(Schema s);
Schema schema_from_name(const std::string& s);
bool schema_in_logic(Schema s, Logic l);
bool is_instance(Schema s, const JFm& f);
// First schema of the logic that f instantiates.
std::optional<Schema> axiom_schema(const JFm& f, Logic l);
std::string jlogic_name(Logic l);  // jik, jikt, jik4, jis4
Logic jlogic_from_name(const std::string& s);

struct JStep {
    enum Kind { Axiom, MP, Can } kind = Axiom;
    Schema schema = Schema::K;  // Axiom only
    JFm formula;                // Axiom: the instance; Can: the inner axiom instance
    std::vector<int> consts;    // Can: c_1 .. c_n, innermost first
    int maj = -1, min = -1;     // MP
};

struct JLProof {
    Logic logic = Logic::IK;
    std::vector<JStep> steps;
};

class JLCheckError : public std::runtime_error {
   public:
    enum Kind { BadAxiomInstance, BadMP, SchemaNotInLogic, BadCan, Empty };
    JLCheckError(Kind k, int step, const std::string& msg)
        : std::runtime_error("step " + std::to_string(step) + ": " + msg), kind(k), step(step) {}
    Kind kind;
    int step;
};

// Validates every step; returns the formula of the last one.
JFm check(const JLProof& p);
// Formulas of all steps (validated).
std::vector<JFm> check_all(const JLProof& p);

JFm can_formula(const std::vector<int>& consts, const JFm& inner);

JLProof subst_proof(const Subst& s, const JLProof& p);

nlohmann::json to_json(const JLProof& p);
JLProof jlproof_from_json(const nlohmann::json& j);

class GlueBudgetExceeded : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Incrementally built Hilbert proof; steps are shared by formula.
class ProofBuilder {
   public:
    explicit ProofBuilder(Logic l, int glue_budget = 2000) : logic_(l), glue_budget_(glue_budget) {}

    Logic logic() const { return logic_; }
    int axiom(Schema s, const JFm& f);
    int can(const std::vector<int>& consts, const JFm& inner);
    int mp(int maj, int min);
    const JFm& formula(int i) const { return steps_.at(i).second; }
    std::optional<int> find(const JFm& f) const;
    int size() const { return static_cast<int>(steps_.size()); }
    int fresh_const() { return next_const_++; }
    int glue_budget() const { return glue_budget_; }

    // Proof of step i with only the steps it depends on.
    JLProof extract(int i) const;
    // Import an external checked proof; returns the step of its theorem.
    int import(const JLProof& p);

    // IPL reasoning over opaque justification/satisfier leaves, with the
    // formulas of `lemmas` as hypotheses. Throws GlueBudgetExceeded.
    int derive(const JFm& goal, const std::vector<int>& lemmas = {});

    // Re-derive step i under a substitution.
    int subst(const Subst& s, int i);

    // Internalised necessitation: ground t with t:A for the formula A of step i.
    std::pair<Tm, int> internalise(int i);
    // From B1 -> ... -> Bn -> A, terms s1..sn: s1:B1 -> ... -> sn:Bn -> t:A.
    std::pair<Tm, int> lift(int i, const std::vector<Tm>& terms);
    // From B1 -> ... -> Bn -> C -> A: s1:B1 -> ... -> sn:Bn -> nu:C -> mu:A.
    std::pair<Tm, int> lift_sat(int i, const std::vector<Tm>& terms, const Tm& nu);

   private:
    int push(JStep st, JFm f);

    Logic logic_;
    int glue_budget_;
    int next_const_ = 0;
    std::vector<std::pair<JStep, JFm>> steps_;
    std::map<JFm, int, JFmLess> index_;
    std::map<int, std::pair<Tm, int>> internalised_;
};

// Proof-level forms of the builder operations. Constants are drawn above
// those already used in p.
std::pair<Tm, JLProof> internalise(const JLProof& p);
std::pair<Tm, JLProof> lift(const JLProof& p, const std::vector<Tm>& terms);
std::pair<Tm, JLProof> lift_sat(const JLProof& p, const std::vector<Tm>& terms, const Tm& nu);

// Standalone IPL prover: a checked proof of goal or nullopt.
std::optional<JLProof> prove_ipl(const JFm& goal, Logic l = Logic::IK, int budget = 2000);

}  // namespace jreal
