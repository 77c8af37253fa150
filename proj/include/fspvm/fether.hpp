// Concrete interpreter over the persistent memory model: a small-step machine
// with an explicit control stack. Execution is metered three ways (statement
// steps, per-statement expression nodes, a countdown gas balance), throw rolls
// back to the entry snapshot of the whole run, and send-family builtins take
// their verdicts from a configurable policy so runs stay reproducible.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fspvm/germ.hpp"
#include "fspvm/ir.hpp"

namespace fspvm::fether {

// Per-invocation budgets. k_stmt bounds charged statement steps, k_val bounds
// expression nodes evaluated within one statement, gas models the chain-level
// allowance. Every charged statement costs one unit of gas and one of k_stmt;
// Seq is free, While and For charge once per condition check.
struct Fuel {
    uint64_t k_stmt = 100000;
    uint64_t k_val = 100000;
    uint64_t gas = 100000;
};

// Verdicts for the send family. Scripted pops one verdict per call and yields
// false once the script is exhausted.
struct SendPolicy {
    enum class Mode : uint8_t { AlwaysTrue, AlwaysFalse, Scripted };
    Mode mode = Mode::AlwaysTrue;
    std::vector<bool> script;
};

// Call-context record: the active environment tag (cells written by the
// program carry it), the function being executed, the call depth, and the gas
// balance. Gas counts down from gas_limit; exhaustion is at zero, so
// gas <= gas_limit holds throughout.
struct Environment {
    std::string contract;
    std::optional<std::string> function;
    uint64_t scope_depth = 0;
    uint64_t gas = 0;
    uint64_t gas_limit = 0;
};

enum class FaultKind : uint8_t {
    DivideByZero, UndefUse, UnboundAddress, AuthDenied, OutOfDomain,
    IndexOutOfRange, ExprFuelExhausted, TypeConfusion,
};
const char* fault_text(FaultKind k);

enum class StopReason : uint8_t { GasLimit, StepBudget };
const char* stop_text(StopReason r);

struct FaultInfo {
    FaultKind kind;
    std::string detail;
    int line = 0;  // statement line active at the fault; 0 when unknown
};

struct ExecOutcome {
    enum class Kind : uint8_t { Normal, Thrown, OutOfGas, Fault };

    Kind kind = Kind::Normal;
    // Normal, OutOfGas and Fault carry the state at stop. Thrown carries the
    // entry snapshot unchanged: a reverted run leaves no trace, events
    // included.
    germ::Memory memory;
    Environment env;
    std::optional<FaultInfo> fault;  // Fault only
    std::optional<StopReason> stop;  // OutOfGas only
    uint64_t gas_used = 0;
    uint64_t steps = 0;

    bool normal() const { return kind == Kind::Normal; }
    std::string text() const;  // "normal", "thrown", "out of gas: gas limit", ...
};

// Option view of an outcome: Normal and Thrown terminate with a memory image
// (final state resp. rollback image), abnormal stops yield none.
std::optional<germ::Memory> as_option(const ExecOutcome& o);

struct ExecConfig {
    Fuel fuel;
    germ::StdLib lib;
    germ::MapStrategy strategy;
    // Name-to-label resolution for declared identifiers. Reserved names are
    // recognized before this is consulted; typically wraps an AddressTable.
    std::function<std::optional<ir::LabelAddress>(const std::string&)> resolve;
    SendPolicy sends;
    // Environment tag attributed to the caller of a top-level invocation.
    std::string external_env = "ext";
};

// One charged execution step, as reported to the stepping interface.
struct StepInfo {
    bool finished = false;       // the outcome became available
    ir::StmtPtr executed;        // statement that charged this step
    std::optional<bool> branch;  // condition value when `executed` tested one
};

// The machine is reusable: running a program that contains Contract
// statements registers the contract's functions, struct layouts and state
// cells, after which call() drives the registered entry points. Budgets and
// the send script reset at every start; registrations persist. One machine
// is one execution context; concurrent runs need separate machines, which
// may share memory snapshots freely.
class Machine {
  public:
    explicit Machine(ExecConfig cfg);

    ExecOutcome run(const ir::Program& prog, germ::Memory m0);
    ExecOutcome exec_stmt(const ir::StmtPtr& s, germ::Memory m0);
    ExecOutcome call(const std::string& function,
                     const std::vector<germ::Value>& args, germ::Memory m0);

    // Stepping interface behind run/call, one charged statement per step();
    // the interactive debugger sits on this.
    void start(const ir::Program& prog, germ::Memory m0);
    void start_call(const std::string& function,
                    const std::vector<germ::Value>& args, germ::Memory m0);
    StepInfo step();
    bool finished() const { return outcome_.has_value(); }
    const ExecOutcome& outcome() const { return *outcome_; }
    const germ::Memory& current_memory() const { return mem_; }
    const Environment& environment() const { return env_; }

    bool has_function(const std::string& name) const { return funs_.count(name) != 0; }
    const ir::StmtPtr* function_decl(const std::string& name) const;
    const ir::StructRegistry& structs() const { return structs_; }

  private:
    struct Task {
        enum class K : uint8_t { Stmt, Loop, Restore };
        K k = K::Stmt;
        ir::StmtPtr s;  // Stmt: the statement; Loop: the originating While
        std::string contract, fenv;  // Restore
        std::optional<std::string> function;
        uint64_t depth = 0;
    };

    struct EvalOut {
        std::optional<germ::Value> v;
        std::optional<FaultInfo> fault;

        static EvalOut ok(germ::Value val);
        static EvalOut fail(FaultKind k, std::string detail);
    };

    struct Accessor {
        bool is_member = false;
        std::string member;
        germ::Value key;  // mapping key or array index
    };
    struct LRef {
        germ::MachineAddress root{};
        std::vector<Accessor> accs;
    };

    void begin_session(germ::Memory m0);
    void begin_function(const ir::StmtPtr& decl, std::vector<germ::Value> args,
                        const std::string& caller_env);
    void push_block(const ir::Program& p);

    void exec(const ir::StmtPtr& s, StepInfo& info);
    void loop_check(const ir::StmtPtr& w, StepInfo& info);
    void exec_contract(const ir::StmtPtr& s);
    void exec_fun_decl(const ir::StmtPtr& s);
    void exec_var_decl(const ir::StmtPtr& s);
    void exec_assign(const ir::StmtPtr& s);
    void exec_call(const ir::StmtPtr& s);
    void register_struct(const ir::StmtPtr& s);
    void unwind_return();

    EvalOut eval(const ir::ExprPtr& e);
    EvalOut eval_binop(const ir::Expr& e);
    EvalOut arith(ir::BinOp op, const germ::Value& l, const germ::Value& r);
    EvalOut compare(ir::BinOp op, const germ::Value& l, const germ::Value& r);
    EvalOut member_of(const germ::Value& v, const std::string& name);
    EvalOut read_name(const std::string& name);
    std::optional<FaultInfo> resolve_lvalue(const ir::ExprPtr& e, LRef& out);
    EvalOut update_at(const germ::Value& cur, const std::vector<Accessor>& accs,
                      size_t i, const germ::Value& v);

    std::optional<ir::LabelAddress> resolve_name(const std::string& name) const;
    std::optional<germ::MachineAddress> map_or_fault(const std::string& name,
                                                     std::optional<FaultInfo>& out) const;
    const ir::StructLayout* layout_of(const std::string& name) const;
    germ::Auth auth_for(const std::optional<ir::Visibility>& vis) const;
    bool next_send_verdict();
    void note_overflow(const char* op, unsigned bits, ir::Sign sign);
    void flush_notes();

    bool bail(EvalOut& r);  // moves an eval fault into the outcome
    void finish_normal();
    void finish_thrown();
    void finish_stop(StopReason r);
    void finish_fault(FaultInfo f);
    void fill_stats(ExecOutcome& o);

    ExecConfig cfg_;
    std::map<std::string, ir::StructLayout> lib_layouts_;

    std::map<std::string, ir::StmtPtr> funs_;  // Fun declarations by bare name
    ir::StructRegistry structs_;

    germ::Memory mem_, entry_;
    std::vector<Task> tasks_;
    std::optional<ExecOutcome> outcome_;
    Environment env_;
    std::string fenv_;
    uint64_t k_stmt_left_ = 0, k_val_left_ = 0, steps_ = 0;
    size_t script_pos_ = 0;
    std::vector<std::string> notes_;  // overflow notes of the current statement
    int cur_line_ = 0;
};

// Rebinds one member of a reserved struct cell; drivers set msg.sender,
// msg.values and this.balance through this before a call. Yields nothing when
// the member is not part of the cell's layout.
std::optional<germ::Memory> with_special_member(const germ::Memory& m,
                                                ir::SpecialRef base,
                                                const std::string& member,
                                                germ::Value v,
                                                const germ::StdLib& lib);

}  // namespace fspvm::fether
