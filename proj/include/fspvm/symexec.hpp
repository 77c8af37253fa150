// Hoare-style property checking by symbolic execution. A specification names
// a program, an entry function, typed symbols standing for unknown inputs, a
// precondition (memory assignments plus a boolean constraint), and a
// postcondition. The engine explores the branch tree, pruning infeasible
// paths with a built-in solver, and reports Verified, Falsified with a
// concretely replayed counterexample, or an honest Unknown. Verified blocks
// can be summarized and reused so later runs skip re-exploring them.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fspvm/fether.hpp"
#include "fspvm/germ.hpp"
#include "fspvm/ir.hpp"

namespace fspvm::symexec {

// ---------------------------------------------------------------------------
// Symbolic values

enum class SymOp : uint8_t {
    Add, Sub, Mul, Div, Mod, Neg,
    Eq, Ne, Lt, Le, Gt, Ge,
    And, Or, Not, Cast,
};
const char* sym_op_text(SymOp op);

// Term over unknowns: a concrete machine value, a named symbol, an operator
// application, or a compound whose parts may themselves be symbolic. Symbols
// are integer- or boolean-typed only. Applications carry their result type;
// all-concrete applications are folded at construction by the evaluator, so
// App nodes always depend on at least one symbol.
class SymValue {
  public:
    enum class Kind : uint8_t { Concrete, Sym, App, StructS, ArrayS, MapS };

    static SymValue concrete(germ::Value v);
    static SymValue sym(std::string name, ir::LType ty);  // int/bool only
    static SymValue app(SymOp op, std::vector<SymValue> args, ir::LType ty);
    static SymValue struct_s(std::string layout, std::vector<SymValue> members);
    static SymValue array_s(ir::LType elem_ty, std::vector<SymValue> items);
    // Entries with symbolic payloads stay present even when equal to the
    // default; concrete-on-concrete writes canonicalize like the value model.
    static SymValue map_s(ir::LType key_ty, ir::LType val_ty, SymValue dflt);

    Kind kind() const { return kind_; }
    bool is_concrete() const { return kind_ == Kind::Concrete; }
    const germ::Value& value() const { return *value_; }
    const std::string& name() const { return name_; }  // Sym, StructS layout
    const ir::LType& ty() const { return ty_; }        // Sym/App result type
    SymOp op() const { return op_; }
    const std::vector<SymValue>& args() const { return kids_; }

    const std::vector<SymValue>& members() const { return kids_; }  // StructS
    SymValue with_member(size_t idx, SymValue v) const;

    const ir::LType& elem_ty() const { return ty_; }                // ArrayS
    const std::vector<SymValue>& items() const { return kids_; }
    SymValue with_item(size_t idx, SymValue v) const;

    const ir::LType& key_ty() const { return ty_; }                 // MapS
    const ir::LType& val_ty() const { return ty2_; }
    const SymValue& map_default() const { return kids_[0]; }
    size_t map_entry_count() const { return (kids_.size() - 1) / 2; }
    const SymValue& map_entry_key(size_t i) const { return kids_[1 + 2 * i]; }
    const SymValue& map_entry_val(size_t i) const { return kids_[2 + 2 * i]; }
    // Concrete-key lookup; a miss yields the default.
    const SymValue& map_get(const germ::Value& key) const;
    SymValue map_set(const germ::Value& key, SymValue v) const;

    bool operator==(const SymValue& o) const;
    bool operator!=(const SymValue& o) const { return !(*this == o); }

    // Mentions at least one symbol.
    bool symbolic() const;
    // Infix rendering, parseable by parse_formula: "(money == 0) || cp".
    std::string text() const;

  private:
    Kind kind_ = Kind::Concrete;
    SymOp op_ = SymOp::Add;
    std::shared_ptr<const germ::Value> value_;
    std::string name_;
    ir::LType ty_, ty2_;
    std::vector<SymValue> kids_;
};

// Lifts a concrete value, wrapping nothing; compound values stay Concrete
// until a symbolic write touches a part of them.
SymValue lift(const germ::Value& v);

// ---------------------------------------------------------------------------
// Path conditions and solving

// Ordered conjunction of boolean terms. Duplicates are dropped; adding the
// negation of a present term (or a term whose negation is present) marks the
// condition trivially false without a solver call.
class PathCondition {
  public:
    void add(SymValue c);
    const std::vector<SymValue>& terms() const { return terms_; }
    bool trivially_false() const { return false_; }
    std::string text() const;

  private:
    std::vector<SymValue> terms_;
    bool false_ = false;
};

struct SolveResult {
    enum class Kind : uint8_t { Sat, Unsat, Unknown };
    Kind kind = Kind::Unknown;
    // Sat only: deterministic least witness (booleans false-first by symbol
    // name, integers by ascending candidate).
    std::map<std::string, germ::Value> model;
};

// Decides a conjunction over the declared symbols. Complete for boolean
// symbols combined with linear integer comparisons (interval reasoning plus
// bounded candidate enumeration over at most three integer symbols);
// anything outside that fragment yields Unknown, never a wrong verdict.
// Evaluates a term whose symbols are all bound in `model`; unbound symbols
// take their type's zero. Empty on type errors or division by zero.
std::optional<germ::Value> eval_term(const SymValue& t,
                                     const std::map<std::string, germ::Value>& model);

SolveResult solve(const std::vector<SymValue>& conjuncts,
                  const std::map<std::string, ir::LType>& symbols);
SolveResult solve(const PathCondition& pc,
                  const std::map<std::string, ir::LType>& symbols);

// ---------------------------------------------------------------------------
// Specifications

struct SymbolDecl {
    std::string name;
    ir::LType ty;                          // int or bool
    std::optional<germ::Value> binding;    // concolic: fixed concrete value
};

// One precondition write: a named cell (or msg.value / msg.sender) set to a
// literal or to a declared symbol.
struct PreAssign {
    std::string target;
    std::optional<germ::Value> literal;    // exactly one of these is set
    std::optional<std::string> symbol;
};

struct Assertion {
    std::string target;    // cell name whose final value is constrained
    SymValue expected;     // expression over declared symbols
};

struct Postcondition {
    enum class Kind : uint8_t { Rollback, OutOfGas, Assertions };
    Kind kind = Kind::Rollback;
    std::vector<Assertion> assertions;
};

struct HoareSpec {
    std::string name;
    ir::Program program;                   // deploy block
    std::string entry;                     // function invoked after deploy
    std::vector<SymbolDecl> symbols;
    std::vector<PreAssign> pre;
    SymValue constraint = SymValue::concrete(germ::Value::boolean(true));
    Postcondition post;
};

struct VerifyOptions {
    fether::Fuel fuel{200, 64, 1000};
    germ::StdLib lib{64};
    germ::MapStrategy strategy;
    std::function<std::optional<ir::LabelAddress>(const std::string&)> resolve;
    uint64_t max_paths = 4096;
};

// ---------------------------------------------------------------------------
// Verdicts

struct Verdict {
    enum class Kind : uint8_t { Verified, Falsified, Unknown };
    Kind kind = Kind::Verified;
    // Falsified: a satisfying assignment that concretely violates the
    // postcondition. Always replayed through the interpreter before being
    // reported; a model that fails to replay is never surfaced.
    std::map<std::string, germ::Value> model;
    std::vector<std::string> trace;        // statements along the violating path
    std::string reason;                    // Unknown only
    std::string text() const;
};

struct VerifyStats {
    uint64_t paths = 0;        // subgoals generated: 1 + one per fork
    uint64_t forks = 0;
    uint64_t pruned = 0;       // subgoals refuted at the fork
    uint64_t leaves = 0;       // subgoals explored to an outcome
    uint64_t block_expansions = 0;   // summarized blocks entered the long way
    uint64_t summaries_applied = 0;
};

struct VerifyResult {
    Verdict verdict;
    VerifyStats stats;
    std::vector<std::string> warnings;     // e.g. vacuous precondition
};

// ---------------------------------------------------------------------------
// Summaries

// Reusable record of a verified block: the content hash of the statement
// list, an entailment guard over cell names, and the block's effect. Only
// rollback effects are summarizable; a summary is stored only after the
// block's own spec returns Verified.
struct Summary {
    uint64_t segment_hash = 0;
    SymValue pre = SymValue::concrete(germ::Value::boolean(true));
    enum class Effect : uint8_t { Rollback } effect = Effect::Rollback;
    // Canonical text of the summarized statement; consumers compare it before
    // applying the effect, so hash collisions degrade to a fall-through.
    std::string segment_text;

    std::string serialize() const;
    static std::optional<Summary> parse(const std::string& text);
};

// One summary per segment hash, persisted as a directory of files named by
// the hash in hex.
class SummaryStore {
  public:
    void put(Summary s);
    const Summary* find(uint64_t hash) const;
    size_t size() const { return entries_.size(); }

    // Load every well-formed summary file in `dir`; missing directory loads
    // an empty store. Save writes one file per entry, creating `dir`.
    static SummaryStore load(const std::string& dir);
    bool save(const std::string& dir) const;

  private:
    std::map<uint64_t, Summary> entries_;
};

// Derives a summary from a spec just verified with a rollback postcondition:
// the guard is the spec constraint with each symbol replaced by the cell it
// initializes. Yields nothing for non-rollback posts or symbols that never
// reach memory.
std::optional<Summary> summarize(const HoareSpec& spec);

// ---------------------------------------------------------------------------
// Verification

// Explores every feasible path with all symbols free.
VerifyResult verify_static(const HoareSpec& spec, const VerifyOptions& opts);

// Substitutes the spec's bound symbols before exploration, shrinking the
// branch tree; with every symbol bound this is a single interpreted run.
VerifyResult verify_concolic(const HoareSpec& spec, const VerifyOptions& opts);

// Like verify_static, but when a statement's content hash matches a stored
// summary whose guard is entailed by the current path condition, the
// summary's effect is applied instead of descending into the statement. A
// failed entailment falls through to normal execution.
VerifyResult verify_selective(const HoareSpec& spec, const SummaryStore& store,
                              const VerifyOptions& opts);

// ---------------------------------------------------------------------------
// Stepping

// Single-path walk of the symbolic machine for interactive debugging: one
// charged statement per step, a full memory image after each, and an
// operator-chosen side at every symbolic fork. With no symbols in the spec
// the session is an ordinary concrete stepper.
class DebugSession {
  public:
    DebugSession(const HoareSpec& spec, const VerifyOptions& opts);

    struct Step {
        bool ok = true;             // false: the command was rejected
        std::string error;          // rejection text ("session ended", ...)
        bool finished = false;
        bool at_fork = false;       // a choice is pending; step() waits on it
        std::string executed;       // line text of the charged statement
        std::string branch_true, branch_false;  // fork conditions, at_fork only
        std::string outcome;        // leaf classification, finished only
    };

    // False when construction failed (bad program, unknown entry); the
    // reason is in last_error() and every step() is rejected.
    bool ready() const;
    const std::string& last_error() const { return error_; }

    Step step();
    Step choose(bool branch);       // resolves a pending fork
    std::string dump() const;       // memory image after the last step
    const std::vector<std::string>& trace() const;

  private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
    std::string error_;
};

// ---------------------------------------------------------------------------
// Formula text

// Parses an infix boolean/integer formula over identifiers: `||`, `&&`, `!`,
// comparisons, `+ - * / %`, parentheses, decimal and 0x literals, true and
// false. `resolve` maps each identifier to a term (a declared symbol or a
// cell reference); unresolved identifiers fail the parse. Integer literals
// adopt the width of the nearest typed operand, defaulting to `default_bits`.
struct ParseFormulaResult {
    std::optional<SymValue> formula;
    std::string error;
};
ParseFormulaResult parse_formula(
    const std::string& text,
    const std::function<std::optional<SymValue>(const std::string&)>& resolve,
    unsigned default_bits);

// Compact scalar type spellings shared by spec files and summary files:
// "bool", "uintN", "intN".
std::string scalar_type_text(const ir::LType& ty);
std::optional<ir::LType> scalar_type_from_text(const std::string& text);

// True when `name` denotes a location a spec may read or initialize: an
// identifier the resolver knows, or a member of msg, this or block.
bool known_target(const std::string& name, const VerifyOptions& opts);

}  // namespace fspvm::symexec
