#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jreal/nested.hpp"

namespace jreal {

enum class Logic { IK, IKt, IK4, IS4 };
std::string logic_name(Logic l);
Logic logic_from_name(const std::string& s);
inline bool has_t(Logic l) { return l == Logic::IKt || l == Logic::IS4; }
inline bool has_4(Logic l) { return l == Logic::IK4 || l == Logic::IS4; }

enum class Rule {
    BotL,
    Id,
    Contr,
    AndL,
    AndR,
    OrL,
    OrR1,
    OrR2,
    ImpL,
    ImpLS,
    ImpR,
    BoxLBr,
    BoxLDia,
    BoxR,
    DiaL,
    DiaR,
    TL,
    TR,
    FourLBr,
    FourLDia,
    FourR,
    Upd,
};
std::string rule_name(Rule r);
Rule rule_from_name(const std::string& s);
bool rule_in_logic(Rule r, Logic l);

class RuleError : public std::runtime_error {
   public:
    enum Kind { NotApplicable, NotInLogic };
    RuleError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
    Kind kind;
};

// Item conventions in Position::items:
//   one-zone rules      [principal]
//   two-zone rules      [principal, aux] (box_l_*, four_l_*: aux is the bracket; dia_r/four_r: principal is the RHS)
//   contr               the duplicated members
//   imp_l_s             [principal, Λ members at the deepest spine level above the principal...]
//   upd                 path = level holding the box bracket; [bracket member, members of its LHS to hoist...]
struct Expansion {
    std::vector<Sequent> premises;
    // contr: conclusion index -> index of the first / second copy.
    std::vector<std::map<int, int>> copies;
    // imp_l / imp_l_s: flipped bracket indices in premise 1.
    std::map<int, int> reindex;
    // dia_r / four_r: new box bracket; upd: new diamond bracket.
    int fresh = -1;
};

// Premises of a rule read bottom-up. Annotated sequents draw fresh indices
// from `counter` (a private one reserving ann(s) when null).
Expansion apply_rule_backward(const Sequent& s, Rule rule, const Position& pos, Counter* counter = nullptr);

struct Derivation {
    Logic logic = Logic::IK;
    Sequent conclusion;
    Rule rule = Rule::Id;
    Position principal;
    std::vector<Derivation> premises;
};

struct CheckResult {
    bool ok = true;
    std::string error;
    std::vector<int> node;  // premise indices from the root to the failing node
    explicit operator bool() const { return ok; }
};

bool is_annotated(const Sequent& s);
CheckResult check_proof(const Derivation& d, Logic l);

// Index correspondence of an annotated node: the expansion renamed into the
// indices actually used by the node's premises. Throws on mismatch.
Expansion matched_expansion(const Derivation& d);

// node_budget caps the number of sequents visited over all rounds.
std::optional<Derivation> search(const Sequent& s, Logic l, int depth_budget, long node_budget = 200000);
inline std::optional<Derivation> search(const Fm& f, Logic l, int depth_budget, long node_budget = 200000) {
    return search(seq({}, out(f)), l, depth_budget, node_budget);
}

Derivation decompose_impL(const Derivation& d);

// Properly annotate a sequent: LHS negative, RHS positive, left to right.
Sequent annotate_sequent(const Sequent& s, Counter& c);
Derivation annotate_proof(const Derivation& d, Counter& c);
Derivation annotate_proof(const Derivation& d, int seed = 0);
Derivation erase(const Derivation& d);

int count_nodes(const Derivation& d);
bool contains_rule(const Derivation& d, Rule r);

nlohmann::json to_json(const Derivation& d);
Derivation derivation_from_json(const nlohmann::json& j);
std::string to_text(const Derivation& d);

}  // namespace jreal
