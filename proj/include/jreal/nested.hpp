#pragma once

#include <functional>
#include <map>
#include <memory>
#include "json.hpp"
#include <string>
#include <vector>

#include "jreal/syntax.hpp"

namespace jreal {

struct Sequent;
using SeqPtr = std::shared_ptr<const Sequent>;

// LHS member: an input formula, or a diamond bracket when f is null.
struct LItem {
    Fm f;
    int idx = -1;
    std::vector<LItem> body;
    bool is_bracket() const { return !f; }
};

// RHS: an output formula, or a box bracket when f is null.
struct RItem {
    Fm f;
    int idx = -1;
    SeqPtr body;
    bool is_bracket() const { return !f; }
};

struct Sequent {
    std::vector<LItem> lhs;
    RItem rhs;
};

using Lhs = std::vector<LItem>;

LItem in(Fm f);
LItem dia_br(Lhs body, int idx = -1);
RItem out(Fm f);
RItem box_br(Sequent body, int idx = -1);
Sequent seq(Lhs lhs, RItem rhs);

// Structural order; with_idx=false compares erased shapes.
int compare(const LItem& a, const LItem& b, bool with_idx = true);
int compare(const Lhs& a, const Lhs& b, bool with_idx = true);
int compare(const RItem& a, const RItem& b, bool with_idx = true);
int compare(const Sequent& a, const Sequent& b, bool with_idx = true);
inline bool operator==(const Sequent& a, const Sequent& b) { return compare(a, b) == 0; }

// Sort every LHS (erased order first, index as tiebreak), recursively.
void normalize(Lhs& l);
Sequent normalize(Sequent s);

Fm fm(const Sequent& s);
Fm fm(const LItem& i);
Fm fm(const RItem& r);
Fm fm_lhs(const Lhs& l);  // empty -> bot -> bot

std::set<int> ann(const Sequent& s);
std::set<int> ann(const Lhs& l);
Sequent erase(const Sequent& s);
Lhs erase(const Lhs& l);

// Positions: path descends through bracket members (an LHS index selects a
// diamond bracket, index == |lhs| selects the RHS box bracket); items are
// member indices at the addressed level.
struct Position {
    std::vector<int> path;
    std::vector<int> items;
    bool operator==(const Position&) const = default;
};

class PositionError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// A level: a full sequent (rhs set) on the output spine, or a diamond body (rhs null).
struct LevelView {
    const Lhs* lhs;
    const RItem* rhs;
};
LevelView level_at(const Sequent& s, const std::vector<int>& path);

// Copy-on-write edit of the level at path; result is normalized.
using LevelEdit = std::function<void(Lhs& lhs, RItem* rhs)>;
Sequent edit_level(const Sequent& s, const std::vector<int>& path, const LevelEdit& fn);

// Mutable access to every level from the root down to path. Edits to an
// ancestor's LHS invalidate deeper levels, so edit deepest first.
struct MutLevel {
    Lhs* lhs;
    RItem* rhs;
};
using MultiEdit = std::function<void(std::vector<MutLevel>&)>;
Sequent edit_levels(const Sequent& s, const std::vector<int>& path, const MultiEdit& fn, bool norm = true);

// Number of leading RHS steps in path, i.e. the depth of the deepest spine level above it.
size_t spine_length(const Sequent& s, const std::vector<int>& path);

inline int depth(const Position& p) { return static_cast<int>(p.path.size()); }

// Contexts: input contexts take LHS material, output contexts take a sequent.
enum class ContextKind { Input, Output, Lhs };
Sequent fill_input(const Sequent& s, const std::vector<int>& path, const Lhs& payload);
Sequent fill_output(const Sequent& s, const std::vector<int>& path, const Sequent& payload);
Lhs extract_lhs(const Sequent& s, const std::vector<int>& path);

// Output pruning of the input context whose hole is the level at `path`.
// The hole level receives `payload` as its output. When drop_pi is set, the
// output Π at the spine level is discarded instead of pruned. hole_edit runs
// on the hole level's LHS first (e.g. to remove the principal formula). Flipped brackets
// get fresh indices from `counter` (when annotated); reindex maps old to new.
struct Pruned {
    Sequent seq;
    std::map<int, int> reindex;
};
Pruned prune_fill(const Sequent& s, const std::vector<int>& path, const RItem& payload, Counter* counter,
                  bool drop_pi = false, const std::function<void(Lhs&)>& hole_edit = nullptr);

// Text rendering with * for input and o for output.
std::string to_string(const Sequent& s);
std::string to_string(const Lhs& l);

nlohmann::json to_json(const Sequent& s);
Sequent sequent_from_json(const nlohmann::json& j);

}  // namespace jreal
