#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace jreal {

// Modal formulas. idx < 0 means unannotated.
enum class Op { Bot, Atom, And, Or, Imp, Box, Dia };

struct Formula;
using Fm = std::shared_ptr<const Formula>;

struct Formula {
    Op op;
    std::string name;
    int idx = -1;
    Fm l, r;
};

Fm mk_bot();
Fm mk_atom(const std::string& name);
Fm mk_and(Fm a, Fm b);
Fm mk_or(Fm a, Fm b);
Fm mk_imp(Fm a, Fm b);
Fm mk_box(Fm a, int idx = -1);
Fm mk_dia(Fm a, int idx = -1);
Fm mk_top();  // bot -> bot

int compare(const Fm& a, const Fm& b, bool with_idx = true);
inline bool equal(const Fm& a, const Fm& b) { return compare(a, b) == 0; }
struct FmLess {
    bool operator()(const Fm& a, const Fm& b) const { return compare(a, b) < 0; }
};

std::string to_string(const Fm& f);

// Terms: proof terms and satisfiers share one node type, split by operator.
enum class TOp { PVar, RPVar, Const, Sum, App, Bang, Update, SVar, RSVar, Union, Prop };

struct Term;
using Tm = std::shared_ptr<const Term>;

struct Term {
    TOp op;
    int n = 0;
    Tm a, b;  // Update: a = satisfier, b = term. Prop: a = term, b = satisfier.
    bool is_sat() const {
        return op == TOp::SVar || op == TOp::RSVar || op == TOp::Union || op == TOp::Prop;
    }
};

Tm pvar(int n);
Tm rpvar(int n);
Tm cnst(int n);
Tm sum(Tm s, Tm t);
Tm app(Tm s, Tm t);
Tm bang(Tm t);
Tm update(Tm mu, Tm t);
Tm svar(int n);
Tm rsvar(int n);
Tm uni(Tm mu, Tm nu);
Tm prop(Tm t, Tm mu);

int compare(const Tm& a, const Tm& b);
inline bool equal(const Tm& a, const Tm& b) { return compare(a, b) == 0; }
bool ground(const Tm& t);
std::string to_string(const Tm& t);

// Variables as (kind, n): kind 'x' proof var, 'a' satisfier var, 'y' reserved proof, 'b' reserved sat.
struct Var {
    char kind;
    int n;
    auto operator<=>(const Var&) const = default;
};
std::string to_string(const Var& v);
void collect_vars(const Tm& t, std::set<Var>& out);

// Justification formulas.
enum class JOp { Bot, Atom, And, Or, Imp, Just, Sat };

struct JFormula;
using JFm = std::shared_ptr<const JFormula>;

struct JFormula {
    JOp op;
    std::string name;
    Tm t;
    JFm l, r;  // Just/Sat: body in l
};

JFm jbot();
JFm jatom(const std::string& name);
JFm jand(JFm a, JFm b);
JFm jor(JFm a, JFm b);
JFm jimp(JFm a, JFm b);
JFm just(Tm t, JFm a);
JFm sat(Tm mu, JFm a);
JFm jtop();

int compare(const JFm& a, const JFm& b);
inline bool equal(const JFm& a, const JFm& b) { return compare(a, b) == 0; }
struct JFmLess {
    bool operator()(const JFm& a, const JFm& b) const { return compare(a, b) < 0; }
};
std::string to_string(const JFm& f);
std::set<Var> vars(const JFm& f);

// Substitutions on proof and satisfier variables.
struct Subst {
    std::map<Var, Tm> m;
    bool empty() const { return m.empty(); }
    Tm apply(const Tm& t) const;
    JFm apply(const JFm& f) const;
    std::set<Var> dom() const;
    // (this ∘ other)(v) = this(other(v))
    Subst after(const Subst& other) const;
};

// Polarity and paths.
enum class Polarity { Positive, Negative };
class PathError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};
Polarity polarity_at(const Fm& f, const std::vector<int>& path);
Fm subformula_at(const Fm& f, const std::vector<int>& path);

// Fresh index supply: smallest unused index >= base in a residue class.
class Counter {
   public:
    explicit Counter(int base = 0) : base_(base) {}
    int fresh(int residue);
    void reserve(int n) { used_.insert(n); }
    void reserve_all(const std::set<int>& s) { used_.insert(s.begin(), s.end()); }
    bool used(int n) const { return used_.count(n) > 0; }

   private:
    int base_;
    std::set<int> used_;
};

Fm properly_annotate(const Fm& f, Counter& c, bool positive = true);
Fm properly_annotate(const Fm& f, int seed = 0);
Fm erase(const Fm& f);
bool is_annotated(const Fm& f);
// Distinct indices, residue classes, parity vs polarity.
bool properly_annotated(const Fm& f, bool positive = true, std::string* why = nullptr);

std::set<int> ann(const Fm& f);
std::set<Var> negvar(const Fm& f);
std::set<Var> negvar_of(const std::set<int>& idx);

Fm forget_modal(const JFm& f);
inline Fm forget(const JFm& f) { return forget_modal(f); }

// Realisation functions: index -> term.
using Realisation = std::map<int, Tm>;

class RealisationError : public std::runtime_error {
   public:
    enum Kind { MissingIndex, ResidueMismatch, SelfReferentialSatisfier };
    RealisationError(Kind k, int n, const std::string& msg) : std::runtime_error(msg), kind(k), n(n) {}
    Kind kind;
    int n;
};

// Variable forced at a negative index (x_n for 4n+1, a_n for 4n+3).
Tm forced_var(int idx);
// Leaf recipe term: reserved y^m / a^m for positive indices, forced vars otherwise.
Tm recipe_term(int idx);
bool residue_ok(int idx, const Tm& t);

JFm apply_realisation(const Realisation& r, const Fm& f);

// Normality: negative modalities carry the forced variable, each occurring at one modality.
bool normal_realisation(const Realisation& r, const Fm& f, std::string* why = nullptr);

}  // namespace jreal
