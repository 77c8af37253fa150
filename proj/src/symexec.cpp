// The symbolic machine shadows the interpreter statement for statement: same
// control stack, same charge order, same fault surface. Where the concrete
// machine reads a value, this one reads a term; where a condition's truth
// depends on a symbol, execution suspends, the pending statement's charge is
// rolled back, and the explorer forks the state along both answers. A leaf
// that might violate the postcondition is never reported from terms alone:
// the solver's model is replayed through the real interpreter first.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fspvm/fether.hpp"
#include "fspvm/frontend.hpp"
#include "fspvm/symexec.hpp"
#include "symexec_internal.hpp"

namespace fspvm::symexec {

using fether::FaultInfo;
using fether::FaultKind;
using germ::MachineAddress;
using germ::Value;
using ir::Int;

std::string Verdict::text() const {
    switch (kind) {
        case Kind::Verified: return "verified";
        case Kind::Falsified: return "falsified";
        case Kind::Unknown:
            return reason.empty() ? "unknown" : "unknown: " + reason;
    }
    return "?";
}

namespace {

// ---------------------------------------------------------------------------
// Term helpers

std::optional<ir::LType> scalar_type_of(const SymValue& v) {
    switch (v.kind()) {
        case SymValue::Kind::Concrete:
            if (v.value().kind() == Value::Kind::IntV)
                return ir::LType::integer(v.value().int_bits(), v.value().int_sign());
            if (v.value().kind() == Value::Kind::BoolV) return ir::LType::boolean();
            return std::nullopt;
        case SymValue::Kind::Sym:
        case SymValue::Kind::App:
            if (v.ty().is_int() || v.ty().is_bool()) return v.ty();
            return std::nullopt;
        default:
            return std::nullopt;
    }
}

bool concrete_bool(const SymValue& v, bool b) {
    return v.is_concrete() && v.value().kind() == Value::Kind::BoolV &&
           v.value().bool_val() == b;
}

SymOp flipped(SymOp op) {
    switch (op) {
        case SymOp::Eq: return SymOp::Ne;
        case SymOp::Ne: return SymOp::Eq;
        case SymOp::Lt: return SymOp::Ge;
        case SymOp::Le: return SymOp::Gt;
        case SymOp::Gt: return SymOp::Le;
        case SymOp::Ge: return SymOp::Lt;
        default: return op;
    }
}

bool is_cmp(SymOp op) {
    return op == SymOp::Eq || op == SymOp::Ne || op == SymOp::Lt ||
           op == SymOp::Le || op == SymOp::Gt || op == SymOp::Ge;
}

// Structural negation: strips a Not, flips a comparison, folds a constant,
// and wraps anything else. Keeping the shape canonical lets the path
// condition spot contradictions without the solver.
SymValue negate(const SymValue& c) {
    if (c.is_concrete() && c.value().kind() == Value::Kind::BoolV)
        return SymValue::concrete(Value::boolean(!c.value().bool_val()));
    if (c.kind() == SymValue::Kind::App) {
        if (c.op() == SymOp::Not) return c.args()[0];
        if (is_cmp(c.op()))
            return SymValue::app(flipped(c.op()), c.args(), ir::LType::boolean());
    }
    return SymValue::app(SymOp::Not, {c}, ir::LType::boolean());
}

// Rewrites Sym leaves through a callback; used to instantiate summary guards
// with the current symbolic cell contents. Empty on any unresolved leaf.
std::optional<SymValue> rewrite_syms(
    const SymValue& t,
    const std::function<std::optional<SymValue>(const std::string&, const ir::LType&)>&
        f) {
    switch (t.kind()) {
        case SymValue::Kind::Concrete:
            return t;
        case SymValue::Kind::Sym:
            return f(t.name(), t.ty());
        case SymValue::Kind::App: {
            std::vector<SymValue> kids;
            kids.reserve(t.args().size());
            for (const auto& k : t.args()) {
                auto r = rewrite_syms(k, f);
                if (!r) return std::nullopt;
                kids.push_back(std::move(*r));
            }
            return SymValue::app(t.op(), std::move(kids), t.ty());
        }
        default:
            return std::nullopt;  // compounds never appear in guard formulas
    }
}

void collect_syms(const SymValue& t, std::map<std::string, ir::LType>& out) {
    switch (t.kind()) {
        case SymValue::Kind::Sym:
            out.emplace(t.name(), t.ty());
            return;
        case SymValue::Kind::App:
            for (const auto& k : t.args()) collect_syms(k, out);
            return;
        case SymValue::Kind::StructS:
        case SymValue::Kind::ArrayS:
        case SymValue::Kind::MapS:
            for (size_t i = 0; i < t.args().size(); ++i) collect_syms(t.args()[i], out);
            return;
        default:
            return;
    }
}

FaultKind fault_from(germ::MemError::Code c) {
    switch (c) {
        case germ::MemError::Code::OutOfDomain: return FaultKind::OutOfDomain;
        case germ::MemError::Code::AuthDenied: return FaultKind::AuthDenied;
        case germ::MemError::Code::MapFailed: return FaultKind::UnboundAddress;
        default: return FaultKind::TypeConfusion;
    }
}

// ---------------------------------------------------------------------------
// Symbolic memory: the concrete model's cells with terms for values. The
// structural equality mirrors the concrete one (cells, then events, then the
// throw flag), so a rollback check degrades to the interpreter's when every
// term is concrete.

struct SymCell {
    SymValue v = SymValue::concrete(Value{});
    std::string env, fenv;
    bool occupied = false;
    germ::Auth auth;

    bool operator==(const SymCell& o) const {
        return v == o.v && env == o.env && fenv == o.fenv && occupied == o.occupied &&
               auth.kind == o.auth.kind && auth.owner == o.auth.owner;
    }
};

struct SymEvent {
    germ::Event::Kind kind = germ::Event::Kind::Send;
    SymValue target = SymValue::concrete(Value{});
    SymValue amount = SymValue::concrete(Value{});
    SymValue result = SymValue::concrete(Value::boolean(false));
    std::string note;

    bool operator==(const SymEvent& o) const {
        return kind == o.kind && target == o.target && amount == o.amount &&
               result == o.result && note == o.note;
    }
};

class SymMem {
  public:
    static SymMem lift_of(const germ::Memory& m) {
        SymMem out;
        out.numbered_ = m.space();
        out.cells_.resize(m.space() + ir::kSpecialCount);
        for (uint32_t f = 0; f < out.cells_.size(); ++f) {
            const germ::MemoryCell& c = m.cell(MachineAddress{f});
            SymCell& s = out.cells_[f];
            s.v = lift(c.v);
            s.env = c.env;
            s.fenv = c.fenv;
            s.occupied = c.occupied;
            s.auth = c.auth;
        }
        out.throw_ = m.throw_flag();
        for (const auto& e : m.events()) {
            SymEvent se;
            se.kind = e.kind;
            se.target = lift(e.target);
            se.amount = lift(e.amount);
            se.result = SymValue::concrete(Value::boolean(e.result));
            se.note = e.note;
            out.events_.push_back(std::move(se));
        }
        return out;
    }

    bool in_domain(MachineAddress a) const { return a.flat < cells_.size(); }
    const SymCell& cell(MachineAddress a) const { return cells_[a.flat]; }
    SymCell& cell_mut(MachineAddress a) { return cells_[a.flat]; }

    struct ReadOut {
        std::optional<SymValue> v;
        std::optional<germ::MemError> err;
    };

    ReadOut read(MachineAddress a, const std::string& env,
                 const std::string& fenv) const {
        if (!in_domain(a))
            return {std::nullopt,
                    germ::MemError{germ::MemError::Code::OutOfDomain, a.text()}};
        const SymCell& c = cells_[a.flat];
        if (!c.auth.admits(env, fenv, c.env))
            return {std::nullopt,
                    germ::MemError{germ::MemError::Code::AuthDenied, a.text()}};
        return {c.v, std::nullopt};
    }

    std::optional<germ::MemError> write(MachineAddress a, SymValue v,
                                        const std::string& env,
                                        const std::string& fenv) {
        if (!in_domain(a))
            return germ::MemError{germ::MemError::Code::OutOfDomain, a.text()};
        SymCell& c = cells_[a.flat];
        if (!c.auth.admits(env, fenv, c.env))
            return germ::MemError{germ::MemError::Code::AuthDenied, a.text()};
        c.v = std::move(v);
        c.occupied = true;
        c.env = env;
        c.fenv = fenv;
        return std::nullopt;
    }

    void write_cell(MachineAddress a, SymCell c) { cells_[a.flat] = std::move(c); }

    void push_event(SymEvent e) { events_.push_back(std::move(e)); }
    const std::vector<SymEvent>& events() const { return events_; }

    // Symbolic arithmetic may or may not wrap concretely, so its overflow
    // events are unknowable from terms; once set, memory equality can only
    // be claimed by a concrete replay.
    bool events_uncertain = false;

    bool operator==(const SymMem& o) const {
        return numbered_ == o.numbered_ && throw_ == o.throw_ && events_ == o.events_ &&
               cells_ == o.cells_;
    }
    bool operator!=(const SymMem& o) const { return !(*this == o); }

    std::string dump() const {
        std::ostringstream out;
        out << "throw := " << (throw_ ? "true" : "false") << '\n';
        for (uint32_t f = 0; f < cells_.size(); ++f) {
            MachineAddress a{f};
            const SymCell& c = cells_[f];
            out << a.text() << " := " << c.v.text() << " [1 "
                << (c.env.empty() ? "-" : c.env) << ' '
                << (c.fenv.empty() ? "-" : c.fenv) << ' '
                << (c.occupied ? "occupied" : "free") << ' ' << c.auth.text() << "]\n";
        }
        return out.str();
    }

  private:
    std::vector<SymCell> cells_;
    size_t numbered_ = 0;
    bool throw_ = false;
    std::vector<SymEvent> events_;
};

// ---------------------------------------------------------------------------
// Named targets: a spec addresses either a declared cell or a member of a
// reserved struct cell (msg.value, msg.sender, this.balance, block.*).

struct TargetRef {
    bool special = false;
    ir::SpecialRef base = ir::SpecialRef::Msg;
    std::string member;      // layout member name, post-alias
    size_t member_idx = 0;
    MachineAddress addr{};
};

std::optional<TargetRef> resolve_target(const std::string& name,
                                        const VerifyOptions& opts) {
    if (opts.resolve) {
        if (auto lab = opts.resolve(name)) {
            if (auto a = opts.strategy.map(*lab)) {
                TargetRef t;
                t.addr = a.value();
                return t;
            }
            return std::nullopt;
        }
    }
    auto dot = name.find('.');
    if (dot == std::string::npos) return std::nullopt;
    std::string base = name.substr(0, dot);
    std::string member = name.substr(dot + 1);
    TargetRef t;
    t.special = true;
    ir::StructLayout layout;
    if (base == "msg") {
        t.base = ir::SpecialRef::Msg;
        layout = opts.lib.msg_layout();
        if (member == "value") member = "values";
    } else if (base == "this") {
        t.base = ir::SpecialRef::This;
        layout = opts.lib.address_layout();
    } else if (base == "block") {
        t.base = ir::SpecialRef::Block;
        layout = opts.lib.block_layout();
    } else {
        return std::nullopt;
    }
    for (size_t i = 0; i < layout.size(); ++i) {
        if (layout[i].first != member) continue;
        t.member = member;
        t.member_idx = i;
        t.addr = MachineAddress::special(ir::special_ref_addr(t.base));
        return t;
    }
    return std::nullopt;
}

SymValue sym_with_member(const SymValue& cur, size_t idx, SymValue v) {
    if (cur.is_concrete() && v.is_concrete())
        return SymValue::concrete(cur.value().with_member(idx, v.value()));
    if (cur.kind() == SymValue::Kind::StructS) return cur.with_member(idx, std::move(v));
    std::vector<SymValue> ms;
    ms.reserve(cur.value().members().size());
    for (const auto& m : cur.value().members()) ms.push_back(lift(m));
    return SymValue::struct_s(cur.value().layout(), std::move(ms))
        .with_member(idx, std::move(v));
}

SymValue sym_with_item(const SymValue& cur, size_t idx, SymValue v) {
    if (cur.is_concrete() && v.is_concrete())
        return SymValue::concrete(cur.value().with_item(idx, v.value()));
    if (cur.kind() == SymValue::Kind::ArrayS) return cur.with_item(idx, std::move(v));
    std::vector<SymValue> items;
    items.reserve(cur.value().items().size());
    for (const auto& it : cur.value().items()) items.push_back(lift(it));
    return SymValue::array_s(cur.value().elem_ty(), std::move(items))
        .with_item(idx, std::move(v));
}

SymValue sym_map_explode(const Value& mv) {
    SymValue out = SymValue::map_s(mv.key_ty(), mv.val_ty(), lift(mv.map_default()));
    for (size_t i = 0; i < mv.map_entry_count(); ++i)
        out = out.map_set(mv.map_entry_key(i), lift(mv.map_entry_val(i)));
    return out;
}

// Reads a target without an authorization check; specs stand outside the
// program's environment discipline, like the loader.
std::optional<SymValue> read_target(const SymMem& m, const TargetRef& t) {
    if (!m.in_domain(t.addr)) return std::nullopt;
    const SymValue& cv = m.cell(t.addr).v;
    if (!t.special) return cv;
    if (cv.is_concrete()) {
        if (cv.value().kind() != Value::Kind::StructV) return std::nullopt;
        if (t.member_idx >= cv.value().members().size()) return std::nullopt;
        return lift(cv.value().members()[t.member_idx]);
    }
    if (cv.kind() != SymValue::Kind::StructS) return std::nullopt;
    if (t.member_idx >= cv.members().size()) return std::nullopt;
    return cv.members()[t.member_idx];
}

bool write_target(SymMem& m, const TargetRef& t, SymValue v) {
    if (!m.in_domain(t.addr)) return false;
    SymCell c = m.cell(t.addr);
    if (!t.special) {
        c.v = std::move(v);
        c.occupied = true;
        m.write_cell(t.addr, std::move(c));
        return true;
    }
    bool struct_like =
        (c.v.is_concrete() && c.v.value().kind() == Value::Kind::StructV) ||
        c.v.kind() == SymValue::Kind::StructS;
    if (!struct_like) return false;
    size_t count = c.v.is_concrete() ? c.v.value().members().size() : c.v.members().size();
    if (t.member_idx >= count) return false;
    c.v = sym_with_member(c.v, t.member_idx, std::move(v));
    m.write_cell(t.addr, std::move(c));
    return true;
}

std::optional<Value> read_target_concrete(const germ::Memory& m, const TargetRef& t) {
    if (!m.in_domain(t.addr)) return std::nullopt;
    const Value& cv = m.cell(t.addr).v;
    if (!t.special) return cv;
    if (cv.kind() != Value::Kind::StructV) return std::nullopt;
    if (t.member_idx >= cv.members().size()) return std::nullopt;
    return cv.members()[t.member_idx];
}

std::optional<germ::Memory> write_target_concrete(const germ::Memory& m,
                                                  const TargetRef& t, Value v,
                                                  const germ::StdLib& lib) {
    if (t.special) return fether::with_special_member(m, t.base, t.member, std::move(v), lib);
    if (!m.in_domain(t.addr)) return std::nullopt;
    germ::MemoryCell c = m.cell(t.addr);
    c.v = std::move(v);
    c.occupied = true;
    return m.write_cell(t.addr, std::move(c));
}

// ---------------------------------------------------------------------------
// The machine

// Terminal classification of one explored path. Budget stops are never
// behaviors of the program, so they land in Undecided rather than a verdict.
struct SymOutcome {
    enum class Kind : uint8_t { Normal, Thrown, OutOfGas, Fault, Undecided };
    Kind kind = Kind::Normal;
    std::optional<FaultInfo> fault;
    std::string reason;  // Undecided

    std::string text() const {
        switch (kind) {
            case Kind::Normal: return "normal";
            case Kind::Thrown: return "thrown (rolled back)";
            case Kind::OutOfGas: return "out of gas: gas limit";
            case Kind::Fault: {
                std::string s = std::string("fault: ") + fether::fault_text(fault->kind);
                if (!fault->detail.empty()) s += " (" + fault->detail + ")";
                return s;
            }
            case Kind::Undecided: return "undecided: " + reason;
        }
        return "?";
    }
};

struct Ctx {
    const VerifyOptions* opts = nullptr;
    const fether::Machine* host = nullptr;  // deployed program: functions, layouts
    const SummaryStore* store = nullptr;
    std::map<std::string, ir::StructLayout> lib_layouts;
    std::map<std::string, ir::LType> symtypes;
    VerifyStats* stats = nullptr;
};

class SymMachine {
  public:
    SymMachine(const Ctx* ctx, SymMem init)
        : ctx_(ctx), mem_(std::move(init)), entry_(mem_), structs_(ctx->host->structs()) {
        env_.contract = ctx->host->environment().contract;
        fenv_ = env_.contract;
    }

    // Mirrors the interpreter's call entry: budgets reset, the entry image
    // snapshotted before parameters are written, caller tagged external.
    bool start_call(const std::string& function, std::vector<SymValue> args) {
        const ir::StmtPtr* decl = find_fun(function);
        if (!decl) return false;
        k_stmt_left_ = ctx_->opts->fuel.k_stmt;
        gas_ = ctx_->opts->fuel.gas;
        env_.function = std::nullopt;
        env_.scope_depth = 0;
        fenv_ = "ext";
        begin_function(*decl, std::move(args), "ext");
        return true;
    }

    bool fork_pending() const { return fork_.has_value(); }
    const SymValue& fork_cond() const { return fork_->cond; }
    bool finished() const { return outcome_.has_value(); }
    const SymOutcome& outcome() const { return *outcome_; }
    const SymMem& mem() const { return mem_; }
    const SymMem& entry() const { return entry_; }
    const PathCondition& pc() const { return pc_; }
    const std::vector<std::string>& trace() const { return trace_; }
    const ir::StmtPtr& last_executed() const { return last_executed_; }

    void seed_pc(const SymValue& c) { pc_.add(c); }

    void choose(bool side) {
        pc_.add(side ? fork_->cond : negate(fork_->cond));
        fork_.reset();
    }

    // One charged statement, or a bookkeeping drain ending the run. When a
    // fork interrupts, the charge is rolled back and the statement re-queued:
    // evaluation up to a fork has no memory effect, so retrying is exact.
    void step() {
        if (outcome_ || fork_) return;
        bool acted = false;
        while (!tasks_.empty()) {
            Task t = std::move(tasks_.back());
            tasks_.pop_back();
            if (t.k == Task::K::Restore) {
                env_.contract = std::move(t.contract);
                env_.function = std::move(t.function);
                env_.scope_depth = t.depth;
                fenv_ = std::move(t.fenv);
                continue;
            }
            if (!t.s) continue;
            if (t.k == Task::K::Stmt && t.s->kind == ir::Statement::Kind::Seq) {
                push_block(t.s->stmts);
                continue;
            }
            cur_line_ = t.s->line;
            if (gas_ == 0) {
                finish_oog();
                break;
            }
            if (k_stmt_left_ == 0) {
                finish_undecided("statement budget exhausted");
                break;
            }
            --gas_;
            --k_stmt_left_;
            k_val_left_ = ctx_->opts->fuel.k_val;
            notes_.clear();
            trace_.push_back(frontend::line_text(t.s));
            acted = true;
            last_executed_ = t.s;
            if (t.k == Task::K::Stmt && ctx_->store && try_summary(t.s)) break;
            if (t.k == Task::K::Loop) {
                loop_check(t.s);
            } else {
                exec(t.s);
            }
            if (fork_) {
                ++gas_;
                ++k_stmt_left_;
                trace_.pop_back();
                tasks_.push_back(std::move(t));
                break;
            }
            if (!outcome_) flush_notes();
            break;
        }
        if (!outcome_ && !acted && !fork_) finish_normal();
    }

  private:
    struct Task {
        enum class K : uint8_t { Stmt, Loop, Restore };
        K k = K::Stmt;
        ir::StmtPtr s;
        std::string contract, fenv;
        std::optional<std::string> function;
        uint64_t depth = 0;
    };

    struct SEval {
        std::optional<SymValue> v;
        std::optional<FaultInfo> fault;
        bool suspend = false;  // a fork or an undecidable point unwound eval

        static SEval ok(SymValue val) {
            SEval r;
            r.v = std::move(val);
            return r;
        }
        static SEval fail(FaultKind k, std::string detail) {
            SEval r;
            r.fault = FaultInfo{k, std::move(detail), 0};
            return r;
        }
        static SEval suspended() {
            SEval r;
            r.suspend = true;
            return r;
        }
    };

    struct SAccessor {
        bool is_member = false;
        std::string member;
        Value key;  // concrete; a symbolic key suspends before this point
    };
    struct LRef {
        MachineAddress root{};
        std::vector<SAccessor> accs;
    };

    struct Fork {
        SymValue cond;
    };

    const Ctx* ctx_;
    SymMem mem_, entry_;
    ir::StructRegistry structs_;
    std::map<std::string, ir::StmtPtr> local_funs_;
    std::vector<Task> tasks_;
    fether::Environment env_;
    std::string fenv_;
    uint64_t gas_ = 0;
    uint64_t k_stmt_left_ = 0;
    uint64_t k_val_left_ = 0;
    uint64_t send_seq_ = 0;
    int cur_line_ = 0;
    std::vector<std::string> notes_;
    std::vector<std::string> trace_;
    ir::StmtPtr last_executed_;
    PathCondition pc_;
    std::optional<Fork> fork_;
    std::optional<SymOutcome> outcome_;

    const ir::StmtPtr* find_fun(const std::string& name) const {
        auto it = local_funs_.find(name);
        if (it != local_funs_.end()) return &it->second;
        return ctx_->host->function_decl(name);
    }

    const ir::StructLayout* layout_of(const std::string& name) const {
        if (const auto* l = structs_.find(name)) return l;
        auto it = ctx_->lib_layouts.find(name);
        return it == ctx_->lib_layouts.end() ? nullptr : &it->second;
    }

    germ::Auth auth_for(const std::optional<ir::Visibility>& vis) const {
        germ::Auth a;
        if (!vis) return a;
        switch (*vis) {
            case ir::Visibility::Public: a.kind = germ::Auth::Kind::Public; break;
            case ir::Visibility::Internal: a.kind = germ::Auth::Kind::Internal; break;
            case ir::Visibility::Private:
                a.kind = germ::Auth::Kind::Owner;
                a.owner = env_.contract;
                break;
        }
        return a;
    }

    std::optional<ir::LabelAddress> resolve_name(const std::string& name) const {
        if (auto s = ir::special_by_name(name)) return ir::LabelAddress::at(*s);
        if (ctx_->opts->resolve) return ctx_->opts->resolve(name);
        return std::nullopt;
    }

    std::optional<MachineAddress> map_or_fault(const std::string& name,
                                               std::optional<FaultInfo>& out) const {
        auto lab = resolve_name(name);
        if (!lab) {
            out = FaultInfo{FaultKind::UnboundAddress, name, 0};
            return std::nullopt;
        }
        auto addr = ctx_->opts->strategy.map(*lab);
        if (!addr) {
            out = FaultInfo{fault_from(addr.error().code), name, 0};
            return std::nullopt;
        }
        return addr.value();
    }

    void push_block(const ir::Program& p) {
        for (auto it = p.rbegin(); it != p.rend(); ++it) {
            if (!*it) continue;
            Task t;
            t.s = *it;
            tasks_.push_back(std::move(t));
        }
    }

    void note_overflow(const char* op, unsigned bits, ir::Sign sign) {
        notes_.push_back(std::string(op) + (sign == ir::Sign::Unsigned ? " u" : " s") +
                         std::to_string(bits));
    }

    void flush_notes() {
        for (auto& n : notes_) {
            SymEvent ev;
            ev.kind = germ::Event::Kind::Overflow;
            ev.note = std::move(n);
            mem_.push_event(std::move(ev));
        }
        notes_.clear();
    }

    void finish_normal() {
        SymOutcome o;
        o.kind = SymOutcome::Kind::Normal;
        outcome_ = std::move(o);
    }
    void finish_thrown() {
        mem_ = entry_;
        SymOutcome o;
        o.kind = SymOutcome::Kind::Thrown;
        outcome_ = std::move(o);
    }
    void finish_oog() {
        SymOutcome o;
        o.kind = SymOutcome::Kind::OutOfGas;
        outcome_ = std::move(o);
    }
    void finish_undecided(std::string reason) {
        SymOutcome o;
        o.kind = SymOutcome::Kind::Undecided;
        o.reason = std::move(reason);
        outcome_ = std::move(o);
    }
    void finish_fault(FaultInfo f) {
        if (f.kind == FaultKind::ExprFuelExhausted) {
            finish_undecided("expression budget exhausted");
            return;
        }
        if (f.line == 0) f.line = cur_line_;
        SymOutcome o;
        o.kind = SymOutcome::Kind::Fault;
        o.fault = std::move(f);
        outcome_ = std::move(o);
    }

    SEval undecided(std::string reason) {
        finish_undecided(std::move(reason));
        return SEval::suspended();
    }

    SEval request_fork(SymValue cond) {
        fork_ = Fork{std::move(cond)};
        return SEval::suspended();
    }

    // True when the caller must stop: a fault finished the run, or a
    // fork/undecided point already recorded itself.
    bool halt(SEval& r) {
        if (r.fault) {
            finish_fault(std::move(*r.fault));
            return true;
        }
        return r.suspend;
    }

    // Answers a symbolic condition from the path condition when it already
    // pins one side; otherwise requests a fork. Retrying the statement after
    // choose() lands back here and resolves.
    std::optional<bool> pinned(const SymValue& cond) {
        const auto& ts = pc_.terms();
        if (std::find(ts.begin(), ts.end(), cond) != ts.end()) return true;
        SymValue neg = negate(cond);
        if (std::find(ts.begin(), ts.end(), neg) != ts.end()) return false;
        return std::nullopt;
    }

    void begin_function(const ir::StmtPtr& decl, std::vector<SymValue> args,
                        const std::string& caller_env) {
        if (decl->args.size() != args.size()) {
            finish_fault({FaultKind::TypeConfusion, "argument count", decl->line});
            return;
        }
        for (size_t i = 0; i < args.size(); ++i) {
            std::optional<FaultInfo> f;
            auto addr = map_or_fault(decl->args[i]->name, f);
            if (!addr) {
                finish_fault(std::move(*f));
                return;
            }
            SymCell cell;
            cell.v = std::move(args[i]);
            cell.env = env_.contract;
            cell.fenv = env_.contract;
            cell.occupied = true;
            mem_.write_cell(*addr, std::move(cell));
        }
        Task restore;
        restore.k = Task::K::Restore;
        restore.contract = env_.contract;
        restore.function = env_.function;
        restore.depth = env_.scope_depth;
        restore.fenv = fenv_;
        tasks_.push_back(std::move(restore));
        env_.function =
            decl->e1 ? std::optional<std::string>(decl->e1->name) : std::nullopt;
        env_.scope_depth += 1;
        fenv_ = caller_env;
        push_block(decl->stmts);
    }

    void unwind_return() {
        while (!tasks_.empty()) {
            Task t = std::move(tasks_.back());
            tasks_.pop_back();
            if (t.k != Task::K::Restore) continue;
            env_.contract = std::move(t.contract);
            env_.function = std::move(t.function);
            env_.scope_depth = t.depth;
            fenv_ = std::move(t.fenv);
            return;
        }
    }

    // A stored summary for this exact statement (hash, then text) lets the
    // machine apply the block's effect without descending, provided the path
    // condition entails the summary's guard over the current cell contents.
    bool try_summary(const ir::StmtPtr& s) {
        uint64_t h = ir::content_hash({s});
        const Summary* sum = ctx_->store->find(h);
        if (!sum) return false;
        if (frontend::pretty(s) != sum->segment_text) return false;
        auto guard = rewrite_syms(
            sum->pre, [&](const std::string& n, const ir::LType&)
                          -> std::optional<SymValue> {
                auto t = resolve_target(n, *ctx_->opts);
                if (!t) return std::nullopt;
                return read_target(mem_, *t);
            });
        bool entailed = false;
        if (guard) {
            std::vector<SymValue> goal = pc_.terms();
            goal.push_back(negate(*guard));
            entailed = solve(goal, ctx_->symtypes).kind == SolveResult::Kind::Unsat;
        }
        if (!entailed) {
            if (ctx_->stats) ++ctx_->stats->block_expansions;
            return false;
        }
        if (ctx_->stats) ++ctx_->stats->summaries_applied;
        finish_thrown();
        return true;
    }

    void exec(const ir::StmtPtr& s) {
        using K = ir::Statement::Kind;
        switch (s->kind) {
            case K::Nil:
                return;
            case K::Seq:
                push_block(s->stmts);
                return;
            case K::StructDecl:
                register_struct(s);
                return;
            case K::Var:
                exec_var_decl(s);
                return;
            case K::Assign:
                exec_assign(s);
                return;
            case K::If: {
                auto c = eval(s->e1);
                if (halt(c)) return;
                std::optional<bool> taken;
                if (c.v->is_concrete()) {
                    if (c.v->value().kind() != Value::Kind::BoolV) {
                        finish_fault({FaultKind::TypeConfusion, "condition", s->line});
                        return;
                    }
                    taken = c.v->value().bool_val();
                } else {
                    auto ty = scalar_type_of(*c.v);
                    if (!ty || !ty->is_bool()) {
                        finish_fault({FaultKind::TypeConfusion, "condition", s->line});
                        return;
                    }
                    taken = pinned(*c.v);
                    if (!taken) {
                        request_fork(*c.v);
                        return;
                    }
                }
                const ir::StmtPtr& branch = *taken ? s->s1 : s->s2;
                if (branch) {
                    Task t;
                    t.s = branch;
                    tasks_.push_back(std::move(t));
                }
                return;
            }
            case K::While:
                loop_check(s);
                return;
            case K::For: {
                ir::Program body;
                if (s->s3) body.push_back(s->s3);
                if (s->s2) body.push_back(s->s2);
                auto loop = ir::Statement::while_(
                    s->e1, ir::Statement::seq(std::move(body), s->line), s->line);
                Task t;
                t.s = std::move(loop);
                tasks_.push_back(std::move(t));
                if (s->s1) {
                    Task init;
                    init.s = s->s1;
                    tasks_.push_back(std::move(init));
                }
                return;
            }
            case K::Fun:
                exec_fun_decl(s);
                return;
            case K::FunCall:
                exec_call(s);
                return;
            case K::Return: {
                if (s->e1) {
                    auto r = eval(s->e1);
                    if (halt(r)) return;
                }
                unwind_return();
                return;
            }
            case K::Throw:
                finish_thrown();
                return;
            case K::Contract:
                exec_contract(s);
                return;
        }
    }

    void loop_check(const ir::StmtPtr& w) {
        auto c = eval(w->e1);
        if (halt(c)) return;
        std::optional<bool> again;
        if (c.v->is_concrete()) {
            if (c.v->value().kind() != Value::Kind::BoolV) {
                finish_fault({FaultKind::TypeConfusion, "condition", w->line});
                return;
            }
            again = c.v->value().bool_val();
        } else {
            auto ty = scalar_type_of(*c.v);
            if (!ty || !ty->is_bool()) {
                finish_fault({FaultKind::TypeConfusion, "condition", w->line});
                return;
            }
            again = pinned(*c.v);
            if (!again) {
                request_fork(*c.v);
                return;
            }
        }
        if (!*again) return;
        Task loop;
        loop.k = Task::K::Loop;
        loop.s = w;
        tasks_.push_back(std::move(loop));
        if (w->s1) {
            Task body;
            body.s = w->s1;
            tasks_.push_back(std::move(body));
        }
    }

    void exec_contract(const ir::StmtPtr& s) {
        if (!s->e1 || s->e1->name.empty()) {
            finish_fault({FaultKind::TypeConfusion, "contract name", s->line});
            return;
        }
        const std::string& name = s->e1->name;
        env_.contract = name;
        fenv_ = name;
        for (const auto& st : s->stmts)
            if (st && st->kind == ir::Statement::Kind::StructDecl) register_struct(st);
        std::optional<FaultInfo> f;
        auto addr = map_or_fault(name, f);
        if (!addr) {
            finish_fault(std::move(*f));
            return;
        }
        SymCell identity;
        identity.v = SymValue::concrete(Value::ptr_contract(*resolve_name(name)));
        identity.env = identity.fenv = name;
        identity.occupied = true;
        mem_.write_cell(*addr, std::move(identity));
        SymCell latch;
        latch.v = SymValue::concrete(Value::boolean(false));
        latch.env = latch.fenv = "lib";
        latch.occupied = true;
        mem_.write_cell(MachineAddress::special(ir::SpecialAddr::SendRe), std::move(latch));
        push_block(s->stmts);
    }

    void register_struct(const ir::StmtPtr& s) {
        ir::StructLayout layout;
        layout.reserve(s->members.size());
        for (const auto& [ty, nm] : s->members) layout.emplace_back(nm, ty);
        structs_.layouts[s->name] = std::move(layout);
    }

    void exec_fun_decl(const ir::StmtPtr& s) {
        if (!s->e1 || s->e1->name.empty()) {
            finish_fault({FaultKind::TypeConfusion, "function name", s->line});
            return;
        }
        const std::string& name = s->e1->name;
        local_funs_[name] = s;
        std::optional<FaultInfo> f;
        auto addr = map_or_fault(name + "()", f);
        if (!addr) {
            finish_fault(std::move(*f));
            return;
        }
        SymCell cell;
        cell.v = SymValue::concrete(Value::statement_v(s));
        cell.env = env_.contract;
        cell.fenv = fenv_;
        cell.occupied = true;
        cell.auth = auth_for(s->vis);
        mem_.write_cell(*addr, std::move(cell));
    }

    void exec_var_decl(const ir::StmtPtr& s) {
        if (!s->e1 || s->e1->name.empty()) {
            finish_fault({FaultKind::TypeConfusion, "declaration", s->line});
            return;
        }
        std::optional<FaultInfo> f;
        auto addr = map_or_fault(s->e1->name, f);
        if (!addr) {
            finish_fault(std::move(*f));
            return;
        }
        auto zero = germ::zero_value(s->e1->out_ty, structs_);
        if (!zero) {
            finish_fault({FaultKind::TypeConfusion, "no zero value: " + s->e1->name,
                          s->line});
            return;
        }
        SymCell cell;
        cell.v = SymValue::concrete(std::move(*zero));
        cell.env = env_.contract;
        cell.fenv = fenv_;
        cell.occupied = true;
        cell.auth = auth_for(s->vis);
        mem_.write_cell(*addr, std::move(cell));
    }

    void exec_assign(const ir::StmtPtr& s) {
        auto rhs = eval(s->e2);
        if (halt(rhs)) return;
        LRef ref;
        auto f = resolve_lvalue(s->e1, ref);
        if (fork_ || outcome_) return;
        if (f) {
            finish_fault(std::move(*f));
            return;
        }
        SymValue out = SymValue::concrete(Value{});
        if (ref.accs.empty()) {
            out = std::move(*rhs.v);
        } else {
            auto cur = mem_.read(ref.root, env_.contract, fenv_);
            if (cur.err) {
                finish_fault({fault_from(cur.err->code), cur.err->detail, s->line});
                return;
            }
            if (cur.v->is_concrete() && cur.v->value().is_undef()) {
                finish_fault({FaultKind::UndefUse, "assignment base", s->line});
                return;
            }
            auto upd = update_at(*cur.v, ref.accs, 0, *rhs.v);
            if (halt(upd)) return;
            out = std::move(*upd.v);
        }
        auto wr = mem_.write(ref.root, std::move(out), env_.contract, fenv_);
        if (wr) {
            finish_fault({fault_from(wr->code), wr->detail, s->line});
            return;
        }
    }

    void exec_call(const ir::StmtPtr& s) {
        if (!s->e1 || s->e1->kind != ir::Expr::Kind::Fun) {
            finish_fault({FaultKind::TypeConfusion, "callee", s->line});
            return;
        }
        const std::string& callee = s->e1->name;
        bool is_send = callee == germ::kSendBuiltin;
        bool is_call = callee == germ::kCallBuiltin;
        bool is_transfer = callee == germ::kTransferBuiltin;
        if (is_send || is_call || is_transfer) {
            if (s->args.size() != 2) {
                finish_fault({FaultKind::TypeConfusion, "send arguments", s->line});
                return;
            }
            auto target = eval(s->args[0]);
            if (halt(target)) return;
            auto amount = eval(s->args[1]);
            if (halt(amount)) return;
            // Each call site's verdict is a fresh unknown; the replay script
            // feeds the model's values back through the scripted policy.
            SymValue verdict =
                SymValue::sym("_send#" + std::to_string(send_seq_++), ir::LType::boolean());
            SymCell latch;
            latch.v = verdict;
            latch.env = latch.fenv = "lib";
            latch.occupied = true;
            mem_.write_cell(MachineAddress::special(ir::SpecialAddr::SendRe),
                            std::move(latch));
            SymEvent ev;
            ev.kind = is_send ? germ::Event::Kind::Send
                              : is_call ? germ::Event::Kind::Call
                                        : germ::Event::Kind::Transfer;
            ev.target = std::move(*target.v);
            ev.amount = std::move(*amount.v);
            ev.result = std::move(verdict);
            mem_.push_event(std::move(ev));
            return;
        }
        const ir::StmtPtr* decl = find_fun(callee);
        if (!decl) {
            finish_fault({FaultKind::UnboundAddress, "function " + callee, s->line});
            return;
        }
        std::vector<SymValue> vals;
        vals.reserve(s->args.size());
        for (const auto& a : s->args) {
            auto r = eval(a);
            if (halt(r)) return;
            vals.push_back(std::move(*r.v));
        }
        begin_function(*decl, std::move(vals), env_.contract);
    }

    std::optional<FaultInfo> resolve_lvalue(const ir::ExprPtr& e, LRef& out) {
        if (!e) return FaultInfo{FaultKind::TypeConfusion, "null assignment target", 0};
        switch (e->kind) {
            case ir::Expr::Kind::Var:
            case ir::Expr::Kind::Par: {
                std::optional<FaultInfo> f;
                auto addr = map_or_fault(e->name, f);
                if (!addr) return f;
                out.root = *addr;
                return std::nullopt;
            }
            case ir::Expr::Kind::Field: {
                if (e->base_is_special)
                    return FaultInfo{FaultKind::TypeConfusion,
                                     "reserved cell is read-only", 0};
                if (auto f = resolve_lvalue(e->a, out)) return f;
                if (fork_ || outcome_) return std::nullopt;
                for (const auto& m : e->path) {
                    SAccessor acc;
                    acc.is_member = true;
                    acc.member = m;
                    out.accs.push_back(std::move(acc));
                }
                return std::nullopt;
            }
            case ir::Expr::Kind::Index: {
                if (auto f = resolve_lvalue(e->a, out)) return f;
                if (fork_ || outcome_) return std::nullopt;
                auto key = eval(e->b);
                if (key.fault) return key.fault;
                if (key.suspend) return std::nullopt;
                if (!key.v->is_concrete()) {
                    undecided("symbolic index in assignment target");
                    return std::nullopt;
                }
                SAccessor acc;
                acc.key = key.v->value();
                out.accs.push_back(std::move(acc));
                return std::nullopt;
            }
            default:
                return FaultInfo{FaultKind::TypeConfusion, "not assignable", 0};
        }
    }

    SEval update_at(const SymValue& cur, const std::vector<SAccessor>& accs, size_t i,
                    const SymValue& v) {
        if (i == accs.size()) return SEval::ok(v);
        const SAccessor& acc = accs[i];
        if (cur.is_concrete() && cur.value().is_undef())
            return SEval::fail(FaultKind::UndefUse, "update base");
        if (acc.is_member) {
            bool concrete_struct =
                cur.is_concrete() && cur.value().kind() == Value::Kind::StructV;
            bool sym_struct = cur.kind() == SymValue::Kind::StructS;
            if (!concrete_struct && !sym_struct)
                return SEval::fail(FaultKind::TypeConfusion, "member of non-struct");
            const std::string& lname =
                concrete_struct ? cur.value().layout() : cur.name();
            const ir::StructLayout* layout = layout_of(lname);
            if (!layout)
                return SEval::fail(FaultKind::TypeConfusion, "unknown layout " + lname);
            size_t count =
                concrete_struct ? cur.value().members().size() : cur.members().size();
            for (size_t k = 0; k < layout->size(); ++k) {
                if ((*layout)[k].first != acc.member) continue;
                if (k >= count)
                    return SEval::fail(FaultKind::TypeConfusion, "short struct value");
                SymValue child =
                    concrete_struct ? lift(cur.value().members()[k]) : cur.members()[k];
                auto inner = update_at(child, accs, i + 1, v);
                if (inner.fault || inner.suspend) return inner;
                return SEval::ok(sym_with_member(cur, k, std::move(*inner.v)));
            }
            return SEval::fail(FaultKind::TypeConfusion, "member " + acc.member);
        }
        bool concrete_map =
            cur.is_concrete() && cur.value().kind() == Value::Kind::MappingV;
        if (concrete_map || cur.kind() == SymValue::Kind::MapS) {
            SymValue child = concrete_map ? lift(cur.value().map_get(acc.key))
                                          : cur.map_get(acc.key);
            auto inner = update_at(child, accs, i + 1, v);
            if (inner.fault || inner.suspend) return inner;
            if (concrete_map) {
                if (inner.v->is_concrete())
                    return SEval::ok(SymValue::concrete(
                        cur.value().map_set(acc.key, inner.v->value())));
                return SEval::ok(
                    sym_map_explode(cur.value()).map_set(acc.key, std::move(*inner.v)));
            }
            return SEval::ok(cur.map_set(acc.key, std::move(*inner.v)));
        }
        bool concrete_arr =
            cur.is_concrete() && cur.value().kind() == Value::Kind::ArrayV;
        if (concrete_arr || cur.kind() == SymValue::Kind::ArrayS) {
            if (acc.key.kind() != Value::Kind::IntV)
                return SEval::fail(FaultKind::TypeConfusion, "array index");
            if (acc.key.int_sign() == ir::Sign::Signed && acc.key.int_signed() < 0)
                return SEval::fail(FaultKind::IndexOutOfRange, acc.key.text());
            size_t count =
                concrete_arr ? cur.value().items().size() : cur.items().size();
            if (acc.key.int_mag() >= count)
                return SEval::fail(FaultKind::IndexOutOfRange, acc.key.text());
            size_t idx = acc.key.int_mag().convert_to<size_t>();
            SymValue child =
                concrete_arr ? lift(cur.value().items()[idx]) : cur.items()[idx];
            auto inner = update_at(child, accs, i + 1, v);
            if (inner.fault || inner.suspend) return inner;
            return SEval::ok(sym_with_item(cur, idx, std::move(*inner.v)));
        }
        return SEval::fail(FaultKind::TypeConfusion, "index base");
    }

    SEval read_name(const std::string& name) {
        std::optional<FaultInfo> f;
        auto addr = map_or_fault(name, f);
        if (!addr) return SEval{std::nullopt, std::move(f), false};
        auto rd = mem_.read(*addr, env_.contract, fenv_);
        if (rd.err) {
            std::string d = rd.err->detail.empty() ? name : rd.err->detail;
            return SEval::fail(fault_from(rd.err->code), std::move(d));
        }
        if (rd.v->is_concrete() && rd.v->value().is_undef())
            return SEval::fail(FaultKind::UndefUse, name);
        return SEval::ok(std::move(*rd.v));
    }

    SEval member_of(const SymValue& v, const std::string& name) {
        bool concrete_struct =
            v.is_concrete() && v.value().kind() == Value::Kind::StructV;
        bool sym_struct = v.kind() == SymValue::Kind::StructS;
        if (!concrete_struct && !sym_struct)
            return SEval::fail(FaultKind::TypeConfusion, "member of non-struct");
        const std::string& lname = concrete_struct ? v.value().layout() : v.name();
        const ir::StructLayout* layout = layout_of(lname);
        if (!layout)
            return SEval::fail(FaultKind::TypeConfusion, "unknown layout " + lname);
        size_t count = concrete_struct ? v.value().members().size() : v.members().size();
        for (size_t i = 0; i < layout->size(); ++i) {
            if ((*layout)[i].first != name) continue;
            if (i >= count)
                return SEval::fail(FaultKind::TypeConfusion, "short struct value");
            return SEval::ok(concrete_struct ? lift(v.value().members()[i])
                                             : v.members()[i]);
        }
        return SEval::fail(FaultKind::TypeConfusion, "member " + name);
    }

    SEval eval(const ir::ExprPtr& e) {
        if (!e) return SEval::fail(FaultKind::TypeConfusion, "null expression");
        if (k_val_left_ == 0) return SEval::fail(FaultKind::ExprFuelExhausted, "");
        --k_val_left_;
        using K = ir::Expr::Kind;
        switch (e->kind) {
            case K::Const:
                return SEval::ok(SymValue::concrete(Value::from_literal(e->lit)));
            case K::Var:
            case K::Par:
                return read_name(e->name);
            case K::Fun: {
                if (auto lab = resolve_name(e->name))
                    return SEval::ok(SymValue::concrete(Value::ptr_fun(*lab)));
                if (auto lab = resolve_name(e->name + "()"))
                    return SEval::ok(SymValue::concrete(Value::ptr_fun(*lab)));
                return SEval::fail(FaultKind::UnboundAddress, e->name);
            }
            case K::Binop:
                return eval_binop(*e);
            case K::Unop: {
                if (e->uop == ir::UnOp::Cast) {
                    auto r = eval(e->a);
                    if (r.fault || r.suspend) return r;
                    const ir::LType& target = e->out_ty;
                    if (r.v->is_concrete()) {
                        auto fr = detail::fold_cast(target, r.v->value());
                        if (!fr.v) return SEval::fail(FaultKind::TypeConfusion, fr.error);
                        return SEval::ok(SymValue::concrete(std::move(*fr.v)));
                    }
                    auto ty = scalar_type_of(*r.v);
                    if (ty && ty->is_int() && target.is_int())
                        return SEval::ok(SymValue::app(SymOp::Cast, {*r.v}, target));
                    if (ty && ty->is_bool() && target.is_bool()) return r;
                    return SEval::fail(FaultKind::TypeConfusion, "cast");
                }
                auto r = eval(e->a);
                if (r.fault || r.suspend) return r;
                if (e->uop == ir::UnOp::Not) {
                    if (r.v->is_concrete()) {
                        auto fr = detail::fold_not(r.v->value());
                        if (!fr.v) return SEval::fail(FaultKind::TypeConfusion, fr.error);
                        return SEval::ok(SymValue::concrete(std::move(*fr.v)));
                    }
                    auto ty = scalar_type_of(*r.v);
                    if (!ty || !ty->is_bool())
                        return SEval::fail(FaultKind::TypeConfusion, "not");
                    return SEval::ok(negate(*r.v));
                }
                if (r.v->is_concrete()) {
                    auto fr = detail::fold_neg(r.v->value());
                    if (!fr.v) return SEval::fail(FaultKind::TypeConfusion, fr.error);
                    if (fr.overflow)
                        note_overflow("neg", r.v->value().int_bits(),
                                      r.v->value().int_sign());
                    return SEval::ok(SymValue::concrete(std::move(*fr.v)));
                }
                auto ty = scalar_type_of(*r.v);
                if (!ty || !ty->is_int())
                    return SEval::fail(FaultKind::TypeConfusion, "neg");
                mem_.events_uncertain = true;
                return SEval::ok(SymValue::app(SymOp::Neg, {*r.v}, *ty));
            }
            case K::Field: {
                SymValue base = SymValue::concrete(Value{});
                if (e->base_is_special) {
                    auto rd = mem_.read(
                        MachineAddress::special(ir::special_ref_addr(e->sref)),
                        env_.contract, fenv_);
                    if (rd.err)
                        return SEval::fail(fault_from(rd.err->code), rd.err->detail);
                    base = std::move(*rd.v);
                } else {
                    auto r = eval(e->a);
                    if (r.fault || r.suspend) return r;
                    base = std::move(*r.v);
                }
                SEval cur = SEval::ok(std::move(base));
                for (const auto& m : e->path) {
                    cur = member_of(*cur.v, m);
                    if (cur.fault || cur.suspend) return cur;
                }
                return cur;
            }
            case K::Index: {
                auto base = eval(e->a);
                if (base.fault || base.suspend) return base;
                auto key = eval(e->b);
                if (key.fault || key.suspend) return key;
                bool concrete_map = base.v->is_concrete() &&
                                    base.v->value().kind() == Value::Kind::MappingV;
                if (concrete_map || base.v->kind() == SymValue::Kind::MapS) {
                    if (!key.v->is_concrete()) {
                        // A map with no explicit entries answers every key
                        // with its default; anything else needs a key value.
                        if (concrete_map && base.v->value().map_entry_count() == 0)
                            return SEval::ok(lift(base.v->value().map_default()));
                        if (!concrete_map && base.v->map_entry_count() == 0)
                            return SEval::ok(base.v->map_default());
                        return undecided("symbolic mapping key");
                    }
                    if (concrete_map)
                        return SEval::ok(lift(base.v->value().map_get(key.v->value())));
                    return SEval::ok(base.v->map_get(key.v->value()));
                }
                bool concrete_arr = base.v->is_concrete() &&
                                    base.v->value().kind() == Value::Kind::ArrayV;
                if (concrete_arr || base.v->kind() == SymValue::Kind::ArrayS) {
                    if (!key.v->is_concrete())
                        return undecided("symbolic array index");
                    const Value& kv = key.v->value();
                    if (kv.kind() != Value::Kind::IntV)
                        return SEval::fail(FaultKind::TypeConfusion, "array index");
                    if (kv.int_sign() == ir::Sign::Signed && kv.int_signed() < 0)
                        return SEval::fail(FaultKind::IndexOutOfRange, kv.text());
                    size_t count = concrete_arr ? base.v->value().items().size()
                                                : base.v->items().size();
                    if (kv.int_mag() >= count)
                        return SEval::fail(FaultKind::IndexOutOfRange, kv.text());
                    size_t idx = kv.int_mag().convert_to<size_t>();
                    return SEval::ok(concrete_arr ? lift(base.v->value().items()[idx])
                                                  : base.v->items()[idx]);
                }
                return SEval::fail(FaultKind::TypeConfusion, "index base");
            }
            case K::StructLit: {
                std::vector<SymValue> vals;
                vals.reserve(e->members.size());
                bool all_concrete = true;
                for (const auto& [name, sub] : e->members) {
                    (void)name;
                    auto r = eval(sub);
                    if (r.fault || r.suspend) return r;
                    all_concrete = all_concrete && r.v->is_concrete();
                    vals.push_back(std::move(*r.v));
                }
                if (all_concrete) {
                    std::vector<Value> cs;
                    cs.reserve(vals.size());
                    for (auto& v : vals) cs.push_back(v.value());
                    return SEval::ok(SymValue::concrete(
                        Value::struct_v(e->out_ty.name(), std::move(cs))));
                }
                return SEval::ok(SymValue::struct_s(e->out_ty.name(), std::move(vals)));
            }
        }
        return SEval::fail(FaultKind::TypeConfusion, "expression kind");
    }

    SEval eval_binop(const ir::Expr& e) {
        using B = ir::BinOp;
        if (e.bop == B::And || e.bop == B::Or) {
            auto l = eval(e.a);
            if (l.fault || l.suspend) return l;
            if (l.v->is_concrete()) {
                if (l.v->value().kind() != Value::Kind::BoolV)
                    return SEval::fail(FaultKind::TypeConfusion, "logical operand");
                bool lv = l.v->value().bool_val();
                if (e.bop == B::And && !lv)
                    return SEval::ok(SymValue::concrete(Value::boolean(false)));
                if (e.bop == B::Or && lv)
                    return SEval::ok(SymValue::concrete(Value::boolean(true)));
                auto r = eval(e.b);
                if (r.fault || r.suspend) return r;
                if (!bool_typed(*r.v))
                    return SEval::fail(FaultKind::TypeConfusion, "logical operand");
                return r;
            }
            if (!bool_typed(*l.v))
                return SEval::fail(FaultKind::TypeConfusion, "logical operand");
            auto r = eval(e.b);
            if (r.fault || r.suspend) return r;
            if (!bool_typed(*r.v))
                return SEval::fail(FaultKind::TypeConfusion, "logical operand");
            if (r.v->is_concrete()) {
                bool rv = r.v->value().bool_val();
                if (e.bop == B::And)
                    return rv ? SEval::ok(*l.v)
                              : SEval::ok(SymValue::concrete(Value::boolean(false)));
                return rv ? SEval::ok(SymValue::concrete(Value::boolean(true)))
                          : SEval::ok(*l.v);
            }
            SymOp op = e.bop == B::And ? SymOp::And : SymOp::Or;
            return SEval::ok(SymValue::app(op, {*l.v, *r.v}, ir::LType::boolean()));
        }
        auto l = eval(e.a);
        if (l.fault || l.suspend) return l;
        auto r = eval(e.b);
        if (r.fault || r.suspend) return r;
        if (l.v->is_concrete() && r.v->is_concrete())
            return fold_pair(e.bop, l.v->value(), r.v->value());
        switch (e.bop) {
            case B::Eq:
            case B::Ne: {
                SymOp op = e.bop == B::Eq ? SymOp::Eq : SymOp::Ne;
                auto tl = scalar_type_of(*l.v);
                auto tr = scalar_type_of(*r.v);
                // Scalars of different types compare unequal like the value
                // model; same-typed ones stay open for the solver.
                if (tl && tr && !(*tl == *tr))
                    return SEval::ok(
                        SymValue::concrete(Value::boolean(e.bop == B::Ne)));
                return SEval::ok(
                    SymValue::app(op, {*l.v, *r.v}, ir::LType::boolean()));
            }
            case B::Lt:
            case B::Le:
            case B::Gt:
            case B::Ge: {
                auto tl = scalar_type_of(*l.v);
                auto tr = scalar_type_of(*r.v);
                if (!tl || !tr || !tl->is_int() || !tr->is_int() || !(*tl == *tr))
                    return SEval::fail(FaultKind::TypeConfusion, "comparison operands");
                SymOp op = e.bop == B::Lt   ? SymOp::Lt
                           : e.bop == B::Le ? SymOp::Le
                           : e.bop == B::Gt ? SymOp::Gt
                                            : SymOp::Ge;
                return SEval::ok(
                    SymValue::app(op, {*l.v, *r.v}, ir::LType::boolean()));
            }
            default: {
                auto tl = scalar_type_of(*l.v);
                auto tr = scalar_type_of(*r.v);
                if (!tl || !tr || !tl->is_int() || !tr->is_int() || !(*tl == *tr))
                    return SEval::fail(FaultKind::TypeConfusion, "arithmetic operands");
                SymOp op = e.bop == B::Add   ? SymOp::Add
                           : e.bop == B::Sub ? SymOp::Sub
                           : e.bop == B::Mul ? SymOp::Mul
                           : e.bop == B::Div ? SymOp::Div
                                             : SymOp::Mod;
                if (op == SymOp::Div || op == SymOp::Mod) {
                    if (r.v->is_concrete()) {
                        if (r.v->value().int_mag() == 0)
                            return SEval::fail(FaultKind::DivideByZero,
                                               ir::binop_text(e.bop));
                    } else {
                        SymValue zero = SymValue::concrete(
                            Value::integer(tl->bits(), tl->sign(), 0));
                        SymValue nonzero = SymValue::app(SymOp::Ne, {*r.v, zero},
                                                         ir::LType::boolean());
                        auto known = pinned(nonzero);
                        if (!known) return request_fork(nonzero);
                        if (!*known)
                            return SEval::fail(FaultKind::DivideByZero,
                                               ir::binop_text(e.bop));
                    }
                }
                bool may_note = op == SymOp::Add || op == SymOp::Sub ||
                                op == SymOp::Mul ||
                                (op == SymOp::Div && tl->sign() == ir::Sign::Signed);
                if (may_note) mem_.events_uncertain = true;
                return SEval::ok(SymValue::app(op, {*l.v, *r.v}, *tl));
            }
        }
    }

    static bool bool_typed(const SymValue& v) {
        auto ty = scalar_type_of(v);
        return ty && ty->is_bool();
    }

    SEval fold_pair(ir::BinOp bop, const Value& a, const Value& b) {
        SymOp op;
        switch (bop) {
            case ir::BinOp::Add: op = SymOp::Add; break;
            case ir::BinOp::Sub: op = SymOp::Sub; break;
            case ir::BinOp::Mul: op = SymOp::Mul; break;
            case ir::BinOp::Div: op = SymOp::Div; break;
            case ir::BinOp::Mod: op = SymOp::Mod; break;
            case ir::BinOp::Eq: op = SymOp::Eq; break;
            case ir::BinOp::Ne: op = SymOp::Ne; break;
            case ir::BinOp::Lt: op = SymOp::Lt; break;
            case ir::BinOp::Le: op = SymOp::Le; break;
            case ir::BinOp::Gt: op = SymOp::Gt; break;
            case ir::BinOp::Ge: op = SymOp::Ge; break;
            default: op = SymOp::And; break;
        }
        auto fr = detail::fold_binop(op, a, b);
        if (!fr.v) {
            if (fr.error == "divide by zero")
                return SEval::fail(FaultKind::DivideByZero, ir::binop_text(bop));
            return SEval::fail(FaultKind::TypeConfusion, fr.error);
        }
        if (fr.overflow)
            note_overflow(ir::binop_text(bop), a.int_bits(), a.int_sign());
        return SEval::ok(SymValue::concrete(std::move(*fr.v)));
    }
};

// ---------------------------------------------------------------------------
// Exploration

struct Prep {
    bool ok = false;
    std::string fail_reason;
    std::shared_ptr<fether::Machine> host;
    germ::Memory deployed;
    SymMem init;
    PathCondition pc0;
    std::map<std::string, ir::LType> symtypes;
    std::map<std::string, Value> bindings;
    std::vector<SymValue> entry_args;  // zero-filled parameter values
    bool vacuous = false;
    std::vector<std::string> warnings;

    Prep() : init(SymMem::lift_of(germ::Memory::init(0, germ::StdLib{64}))) {}
};

Prep fail_prep(std::string reason) {
    Prep p;
    p.fail_reason = std::move(reason);
    return p;
}

bool binding_matches(const Value& v, const ir::LType& ty) {
    if (ty.is_bool()) return v.kind() == Value::Kind::BoolV;
    if (ty.is_int())
        return v.kind() == Value::Kind::IntV && v.int_bits() == ty.bits() &&
               v.int_sign() == ty.sign();
    return false;
}

// Deploys concretely, applies the precondition symbolically, seeds the path
// condition with the constraint. The deploy runs under generous default
// budgets; the spec's fuel governs only the verified call.
Prep prepare(const HoareSpec& spec, const VerifyOptions& opts, bool apply_bindings) {
    fether::ExecConfig cfg;
    cfg.lib = opts.lib;
    cfg.strategy = opts.strategy;
    cfg.resolve = opts.resolve;
    Prep p;
    p.host = std::make_shared<fether::Machine>(cfg);
    auto dep =
        p.host->run(spec.program, germ::Memory::init(opts.strategy.space, opts.lib));
    if (!dep.normal()) return fail_prep("deploy failed: " + dep.text());
    if (!p.host->has_function(spec.entry))
        return fail_prep("unknown entry function: " + spec.entry);
    for (const auto& d : spec.symbols) {
        if (!d.ty.is_int() && !d.ty.is_bool())
            return fail_prep("symbol type must be integer or boolean: " + d.name);
        if (!p.symtypes.emplace(d.name, d.ty).second)
            return fail_prep("duplicate symbol: " + d.name);
        if (d.binding) {
            if (!binding_matches(*d.binding, d.ty))
                return fail_prep("binding type mismatch: " + d.name);
            if (apply_bindings) p.bindings.emplace(d.name, *d.binding);
        }
    }
    p.deployed = dep.memory;
    p.init = SymMem::lift_of(dep.memory);
    for (const auto& pa : spec.pre) {
        SymValue v = SymValue::concrete(Value{});
        if (pa.literal) {
            v = SymValue::concrete(*pa.literal);
        } else if (pa.symbol) {
            auto it = p.symtypes.find(*pa.symbol);
            if (it == p.symtypes.end())
                return fail_prep("undeclared symbol: " + *pa.symbol);
            v = SymValue::sym(*pa.symbol, it->second);
        } else {
            return fail_prep("empty precondition assignment: " + pa.target);
        }
        auto t = resolve_target(pa.target, opts);
        if (!t) return fail_prep("unknown identifier: " + pa.target);
        if (!write_target(p.init, *t, std::move(v)))
            return fail_prep("precondition target not writable: " + pa.target);
    }
    SymValue constraint = spec.constraint;
    if (apply_bindings && !p.bindings.empty()) {
        constraint = detail::subst(constraint, p.bindings);
        for (uint32_t f = 0; f < opts.strategy.space + ir::kSpecialCount; ++f) {
            MachineAddress a{f};
            SymCell c = p.init.cell(a);
            if (!c.v.symbolic()) continue;
            c.v = detail::subst(c.v, p.bindings);
            p.init.write_cell(a, std::move(c));
        }
    }
    if (concrete_bool(constraint, false)) {
        p.vacuous = true;
    } else if (!concrete_bool(constraint, true)) {
        p.pc0.add(constraint);
        auto sat = solve(p.pc0, p.symtypes);
        if (sat.kind == SolveResult::Kind::Unsat) p.vacuous = true;
    }
    if (p.vacuous)
        p.warnings.push_back("vacuous precondition: no input satisfies the constraint");
    const ir::StmtPtr* decl = p.host->function_decl(spec.entry);
    for (const auto& par : (*decl)->args) {
        auto zero = germ::zero_value(par->out_ty, p.host->structs());
        if (!zero) return fail_prep("parameter has no zero value: " + par->name);
        p.entry_args.push_back(SymValue::concrete(std::move(*zero)));
    }
    p.ok = true;
    return p;
}

// How one leaf relates to the postcondition.
struct LeafCheck {
    enum class Kind : uint8_t { Holds, Candidate, Undecided };
    Kind kind = Kind::Holds;
    std::string reason;                              // Undecided
    std::optional<std::map<std::string, Value>> model;  // Candidate, when solved
};

LeafCheck holds() { return {}; }
LeafCheck candidate() {
    LeafCheck c;
    c.kind = LeafCheck::Kind::Candidate;
    return c;
}
LeafCheck undecided_leaf(std::string reason) {
    LeafCheck c;
    c.kind = LeafCheck::Kind::Undecided;
    c.reason = std::move(reason);
    return c;
}

LeafCheck check_leaf(const SymMachine& m, const HoareSpec& spec, const Ctx& ctx) {
    const SymOutcome& o = m.outcome();
    if (o.kind == SymOutcome::Kind::Undecided) return undecided_leaf(o.reason);
    switch (spec.post.kind) {
        case Postcondition::Kind::Rollback: {
            if (o.kind == SymOutcome::Kind::Thrown) return holds();
            if (o.kind == SymOutcome::Kind::Normal) {
                if (m.mem() == m.entry() && !m.mem().events_uncertain) return holds();
                return candidate();
            }
            return candidate();  // abnormal stops yield no final image
        }
        case Postcondition::Kind::OutOfGas: {
            if (o.kind == SymOutcome::Kind::OutOfGas) return holds();
            return candidate();
        }
        case Postcondition::Kind::Assertions: {
            if (o.kind == SymOutcome::Kind::OutOfGas ||
                o.kind == SymOutcome::Kind::Fault)
                return candidate();
            for (const auto& as : spec.post.assertions) {
                auto t = resolve_target(as.target, *ctx.opts);
                if (!t) return undecided_leaf("unknown assertion target: " + as.target);
                auto actual = read_target(m.mem(), *t);
                if (!actual)
                    return undecided_leaf("unreadable assertion target: " + as.target);
                if (*actual == as.expected) continue;
                if (actual->is_concrete() && as.expected.is_concrete()) {
                    if (actual->value() == as.expected.value()) continue;
                    return candidate();
                }
                std::vector<SymValue> goal = m.pc().terms();
                goal.push_back(SymValue::app(SymOp::Ne, {*actual, as.expected},
                                             ir::LType::boolean()));
                auto r = solve(goal, ctx.symtypes);
                if (r.kind == SolveResult::Kind::Unsat) continue;
                if (r.kind == SolveResult::Kind::Sat) {
                    LeafCheck c = candidate();
                    c.model = r.model;
                    return c;
                }
                return undecided_leaf("assertion undecidable: " + as.target);
            }
            return holds();
        }
    }
    return undecided_leaf("unknown postcondition");
}

std::map<std::string, Value> complete_model(std::map<std::string, Value> model,
                                            const HoareSpec& spec) {
    for (const auto& d : spec.symbols) {
        if (d.binding) {
            model[d.name] = *d.binding;
        } else if (!model.count(d.name)) {
            model[d.name] = detail::default_of(d.ty);
        }
    }
    return model;
}

std::vector<bool> send_script(const std::map<std::string, Value>& model) {
    std::vector<bool> script;
    for (size_t k = 0;; ++k) {
        auto it = model.find("_send#" + std::to_string(k));
        if (it == model.end()) break;
        script.push_back(it->second.kind() == Value::Kind::BoolV &&
                         it->second.bool_val());
    }
    return script;
}

// Runs the model through the interpreter and decides whether it concretely
// violates the postcondition. Empty when the replay cannot settle it.
std::optional<bool> replay_violates(const HoareSpec& spec, const VerifyOptions& opts,
                                    const std::map<std::string, Value>& model) {
    fether::ExecConfig cfg;
    cfg.fuel = opts.fuel;
    cfg.lib = opts.lib;
    cfg.strategy = opts.strategy;
    cfg.resolve = opts.resolve;
    cfg.sends.mode = fether::SendPolicy::Mode::Scripted;
    cfg.sends.script = send_script(model);
    fether::Machine machine(cfg);
    auto dep =
        machine.run(spec.program, germ::Memory::init(opts.strategy.space, opts.lib));
    if (!dep.normal()) return std::nullopt;  // spec fuel starves the deploy
    germ::Memory m0 = dep.memory;
    for (const auto& pa : spec.pre) {
        Value v;
        if (pa.literal) {
            v = *pa.literal;
        } else {
            auto it = model.find(*pa.symbol);
            if (it == model.end()) return std::nullopt;
            v = it->second;
        }
        auto t = resolve_target(pa.target, opts);
        if (!t) return std::nullopt;
        auto next = write_target_concrete(m0, *t, std::move(v), opts.lib);
        if (!next) return std::nullopt;
        m0 = std::move(*next);
    }
    const ir::StmtPtr* decl = machine.function_decl(spec.entry);
    if (!decl) return std::nullopt;
    std::vector<Value> args;
    for (const auto& par : (*decl)->args) {
        auto zero = germ::zero_value(par->out_ty, machine.structs());
        if (!zero) return std::nullopt;
        args.push_back(std::move(*zero));
    }
    auto out = machine.call(spec.entry, args, m0);
    bool budget_stop = out.kind == fether::ExecOutcome::Kind::OutOfGas &&
                       out.stop == fether::StopReason::StepBudget;
    switch (spec.post.kind) {
        case Postcondition::Kind::Rollback: {
            if (budget_stop) return std::nullopt;
            auto fin = fether::as_option(out);
            if (!fin) return true;
            return *fin != m0;
        }
        case Postcondition::Kind::OutOfGas: {
            if (budget_stop) return std::nullopt;
            return out.kind != fether::ExecOutcome::Kind::OutOfGas;
        }
        case Postcondition::Kind::Assertions: {
            if (budget_stop) return std::nullopt;
            if (out.kind != fether::ExecOutcome::Kind::Normal &&
                out.kind != fether::ExecOutcome::Kind::Thrown)
                return true;
            for (const auto& as : spec.post.assertions) {
                auto t = resolve_target(as.target, opts);
                if (!t) return std::nullopt;
                auto actual = read_target_concrete(out.memory, *t);
                if (!actual) return std::nullopt;
                auto expected = detail::eval_term(as.expected, model);
                if (!expected) return std::nullopt;
                if (*actual != *expected) return true;
            }
            return false;
        }
    }
    return std::nullopt;
}

VerifyResult run_verify(const HoareSpec& spec, const VerifyOptions& opts,
                        const SummaryStore* store, bool apply_bindings) {
    VerifyResult res;
    Prep prep = prepare(spec, opts, apply_bindings);
    res.warnings = prep.warnings;
    if (!prep.ok) {
        res.verdict.kind = Verdict::Kind::Unknown;
        res.verdict.reason = prep.fail_reason;
        return res;
    }
    if (prep.vacuous) {
        res.verdict.kind = Verdict::Kind::Verified;
        return res;
    }

    Ctx ctx;
    ctx.opts = &opts;
    ctx.host = prep.host.get();
    ctx.store = store;
    ctx.lib_layouts["msg"] = opts.lib.msg_layout();
    ctx.lib_layouts["this"] = opts.lib.address_layout();
    ctx.lib_layouts["block"] = opts.lib.block_layout();
    ctx.symtypes = prep.symtypes;
    ctx.stats = &res.stats;

    SymMachine root(&ctx, prep.init);
    for (const auto& t : prep.pc0.terms()) root.seed_pc(t);
    if (!root.start_call(spec.entry, prep.entry_args)) {
        res.verdict.kind = Verdict::Kind::Unknown;
        res.verdict.reason = "unknown entry function: " + spec.entry;
        return res;
    }

    res.stats.paths = 1;
    std::vector<SymMachine> work;
    work.push_back(std::move(root));
    std::optional<Verdict> falsified;
    std::vector<std::string> open_reasons;

    while (!work.empty() && !falsified) {
        if (res.stats.paths > opts.max_paths) {
            open_reasons.push_back("path limit exceeded");
            break;
        }
        SymMachine m = std::move(work.back());
        work.pop_back();
        bool dead = false;
        while (!m.finished() && !dead) {
            m.step();
            if (!m.fork_pending()) continue;
            SymValue cond = m.fork_cond();
            ++res.stats.paths;
            PathCondition pt = m.pc();
            pt.add(cond);
            PathCondition pf = m.pc();
            pf.add(negate(cond));
            bool feas_t = !pt.trivially_false() &&
                          solve(pt, ctx.symtypes).kind != SolveResult::Kind::Unsat;
            bool feas_f = !pf.trivially_false() &&
                          solve(pf, ctx.symtypes).kind != SolveResult::Kind::Unsat;
            if (feas_t && feas_f) {
                ++res.stats.forks;
                SymMachine other = m;
                other.choose(false);
                work.push_back(std::move(other));
                m.choose(true);
            } else if (feas_t) {
                ++res.stats.pruned;
                m.choose(true);
            } else if (feas_f) {
                ++res.stats.pruned;
                m.choose(false);
            } else {
                res.stats.pruned += 2;
                dead = true;
            }
        }
        if (dead) continue;
        ++res.stats.leaves;
        LeafCheck lc = check_leaf(m, spec, ctx);
        if (lc.kind == LeafCheck::Kind::Holds) continue;
        if (lc.kind == LeafCheck::Kind::Undecided) {
            open_reasons.push_back(lc.reason);
            continue;
        }
        std::map<std::string, Value> model;
        if (lc.model) {
            model = *lc.model;
        } else {
            auto r = solve(m.pc(), ctx.symtypes);
            if (r.kind == SolveResult::Kind::Unsat) continue;  // path was never live
            if (r.kind == SolveResult::Kind::Unknown) {
                open_reasons.push_back("path condition undecidable");
                continue;
            }
            model = r.model;
        }
        model = complete_model(std::move(model), spec);
        auto violated = replay_violates(spec, opts, model);
        if (!violated) {
            open_reasons.push_back("replay could not settle the counterexample");
            continue;
        }
        if (!*violated) {
            open_reasons.push_back("candidate model survived replay");
            continue;
        }
        Verdict v;
        v.kind = Verdict::Kind::Falsified;
        v.model = std::move(model);
        v.trace = m.trace();
        falsified = std::move(v);
    }

    if (falsified) {
        res.verdict = std::move(*falsified);
    } else if (!open_reasons.empty()) {
        res.verdict.kind = Verdict::Kind::Unknown;
        res.verdict.reason = open_reasons.front();
    } else {
        res.verdict.kind = Verdict::Kind::Verified;
    }
    return res;
}

}  // namespace

VerifyResult verify_static(const HoareSpec& spec, const VerifyOptions& opts) {
    return run_verify(spec, opts, nullptr, false);
}

VerifyResult verify_concolic(const HoareSpec& spec, const VerifyOptions& opts) {
    return run_verify(spec, opts, nullptr, true);
}

VerifyResult verify_selective(const HoareSpec& spec, const SummaryStore& store,
                              const VerifyOptions& opts) {
    return run_verify(spec, opts, &store, false);
}

// ---------------------------------------------------------------------------
// Summaries

namespace {

// Locates the entry function's declaration in a deploy block.
const ir::StmtPtr* find_entry_decl(const ir::Program& program,
                                   const std::string& entry) {
    for (const auto& s : program) {
        if (!s) continue;
        if (s->kind == ir::Statement::Kind::Fun && s->e1 && s->e1->name == entry)
            return &s;
        if (s->kind != ir::Statement::Kind::Contract) continue;
        for (const auto& st : s->stmts)
            if (st && st->kind == ir::Statement::Kind::Fun && st->e1 &&
                st->e1->name == entry)
                return &st;
    }
    return nullptr;
}

}  // namespace

std::string scalar_type_text(const ir::LType& ty) {
    if (ty.is_bool()) return "bool";
    if (ty.is_int())
        return (ty.sign() == ir::Sign::Unsigned ? "uint" : "int") +
               std::to_string(ty.bits());
    return ty.text();
}

std::optional<ir::LType> scalar_type_from_text(const std::string& text) {
    if (text == "bool") return ir::LType::boolean();
    auto num = [](const std::string& s) -> std::optional<unsigned> {
        if (s.empty()) return std::nullopt;
        unsigned v = 0;
        for (char c : s) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + unsigned(c - '0');
            if (v > 512) return std::nullopt;
        }
        if (v != 8 && v != 16 && v != 32 && v != 64 && v != 128 && v != 256)
            return std::nullopt;
        return v;
    };
    if (text.rfind("uint", 0) == 0) {
        if (auto b = num(text.substr(4)); b && *b > 0)
            return ir::LType::integer(*b, ir::Sign::Unsigned);
        return std::nullopt;
    }
    if (text.rfind("int", 0) == 0) {
        if (auto b = num(text.substr(3)); b && *b > 0)
            return ir::LType::integer(*b, ir::Sign::Signed);
        return std::nullopt;
    }
    return std::nullopt;
}

bool known_target(const std::string& name, const VerifyOptions& opts) {
    return resolve_target(name, opts).has_value();
}

std::optional<Summary> summarize(const HoareSpec& spec) {
    if (spec.post.kind != Postcondition::Kind::Rollback) return std::nullopt;
    const ir::StmtPtr* decl = find_entry_decl(spec.program, spec.entry);
    if (!decl) return std::nullopt;
    ir::Program body;
    for (const auto& s : (*decl)->stmts)
        if (s && s->kind != ir::Statement::Kind::Nil) body.push_back(s);
    if (body.size() != 1) return std::nullopt;

    std::map<std::string, std::string> cell_of;  // symbol -> initialized target
    for (const auto& pa : spec.pre)
        if (pa.symbol) cell_of.emplace(*pa.symbol, pa.target);
    auto guard = rewrite_syms(
        spec.constraint,
        [&](const std::string& n, const ir::LType& ty) -> std::optional<SymValue> {
            auto it = cell_of.find(n);
            if (it == cell_of.end()) return std::nullopt;
            return SymValue::sym(it->second, ty);
        });
    if (!guard) return std::nullopt;

    Summary sum;
    sum.segment_hash = ir::content_hash(body);
    sum.pre = std::move(*guard);
    sum.effect = Summary::Effect::Rollback;
    sum.segment_text = frontend::pretty(body.front());
    return sum;
}

std::string Summary::serialize() const {
    std::ostringstream out;
    out << "segment " << std::hex << std::setw(16) << std::setfill('0') << segment_hash
        << std::dec << '\n';
    out << "effect rollback\n";
    std::map<std::string, ir::LType> syms;
    collect_syms(pre, syms);
    for (const auto& [name, ty] : syms)
        out << "sym " << name << ' ' << scalar_type_text(ty) << '\n';
    out << "pre " << pre.text() << '\n';
    out << "text\n" << segment_text;
    return out.str();
}

std::optional<Summary> Summary::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Summary sum;
    bool have_hash = false, have_effect = false, have_pre = false;
    std::map<std::string, ir::LType> syms;
    std::string pre_text;
    while (std::getline(in, line)) {
        if (line == "text") break;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "segment") {
            std::string hex;
            ls >> hex;
            if (hex.empty()) return std::nullopt;
            uint64_t h = 0;
            for (char c : hex) {
                int d;
                if (c >= '0' && c <= '9') d = c - '0';
                else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
                else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
                else return std::nullopt;
                h = (h << 4) | uint64_t(d);
            }
            sum.segment_hash = h;
            have_hash = true;
        } else if (key == "effect") {
            std::string eff;
            ls >> eff;
            if (eff != "rollback") return std::nullopt;
            have_effect = true;
        } else if (key == "sym") {
            std::string name, ty;
            ls >> name >> ty;
            auto t = scalar_type_from_text(ty);
            if (name.empty() || !t) return std::nullopt;
            syms.emplace(name, *t);
        } else if (key == "pre") {
            auto pos = line.find("pre ");
            pre_text = line.substr(pos + 4);
            have_pre = true;
        } else if (!key.empty()) {
            return std::nullopt;
        }
    }
    if (!have_hash || !have_effect || !have_pre) return std::nullopt;
    std::ostringstream rest;
    bool first = true;
    while (std::getline(in, line)) {
        if (!first) rest << '\n';
        rest << line;
        first = false;
    }
    sum.segment_text = rest.str();
    if (sum.segment_text.empty()) return std::nullopt;
    auto parsed = parse_formula(
        pre_text,
        [&](const std::string& n) -> std::optional<SymValue> {
            auto it = syms.find(n);
            if (it == syms.end()) return std::nullopt;
            return SymValue::sym(n, it->second);
        },
        64);
    if (!parsed.formula) return std::nullopt;
    sum.pre = std::move(*parsed.formula);
    return sum;
}

void SummaryStore::put(Summary s) { entries_[s.segment_hash] = std::move(s); }

const Summary* SummaryStore::find(uint64_t hash) const {
    auto it = entries_.find(hash);
    return it == entries_.end() ? nullptr : &it->second;
}

SummaryStore SummaryStore::load(const std::string& dir) {
    SummaryStore store;
    std::error_code ec;
    std::filesystem::directory_iterator it(dir, ec), end;
    if (ec) return store;
    for (; it != end; ++it) {
        if (!it->is_regular_file()) continue;
        std::ifstream in(it->path());
        std::ostringstream buf;
        buf << in.rdbuf();
        if (auto sum = Summary::parse(buf.str())) store.put(std::move(*sum));
    }
    return store;
}

bool SummaryStore::save(const std::string& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return false;
    for (const auto& [hash, sum] : entries_) {
        std::ostringstream name;
        name << std::hex << std::setw(16) << std::setfill('0') << hash;
        std::ofstream out(std::filesystem::path(dir) / name.str());
        if (!out) return false;
        out << sum.serialize();
        if (!out) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Stepping sessions

struct DebugSession::Impl {
    VerifyOptions opts;
    HoareSpec spec;
    Prep prep;
    Ctx ctx;
    VerifyStats stats;
    std::optional<SymMachine> m;
};

DebugSession::DebugSession(const HoareSpec& spec, const VerifyOptions& opts) {
    impl_ = std::make_shared<Impl>();
    impl_->opts = opts;
    impl_->spec = spec;
    impl_->prep = prepare(spec, impl_->opts, true);
    if (!impl_->prep.ok) {
        error_ = impl_->prep.fail_reason;
        impl_.reset();
        return;
    }
    Impl& im = *impl_;
    im.ctx.opts = &im.opts;
    im.ctx.host = im.prep.host.get();
    im.ctx.lib_layouts["msg"] = im.opts.lib.msg_layout();
    im.ctx.lib_layouts["this"] = im.opts.lib.address_layout();
    im.ctx.lib_layouts["block"] = im.opts.lib.block_layout();
    im.ctx.symtypes = im.prep.symtypes;
    im.ctx.stats = &im.stats;
    im.m.emplace(&im.ctx, im.prep.init);
    for (const auto& t : im.prep.pc0.terms()) im.m->seed_pc(t);
    if (!im.m->start_call(spec.entry, im.prep.entry_args)) {
        error_ = "unknown entry function: " + spec.entry;
        impl_.reset();
    }
}

bool DebugSession::ready() const { return impl_ != nullptr; }

DebugSession::Step DebugSession::step() {
    Step r;
    if (!impl_) {
        r.ok = false;
        r.error = error_.empty() ? "session not started" : error_;
        return r;
    }
    SymMachine& m = *impl_->m;
    if (m.finished()) {
        r.ok = false;
        r.error = "session ended";
        return r;
    }
    if (m.fork_pending()) {
        r.ok = false;
        r.error = "waiting on a branch choice";
        return r;
    }
    m.step();
    if (m.fork_pending()) {
        r.at_fork = true;
        r.branch_true = m.fork_cond().text();
        r.branch_false = negate(m.fork_cond()).text();
        return r;
    }
    if (m.last_executed()) r.executed = frontend::line_text(m.last_executed());
    if (m.finished()) {
        r.finished = true;
        r.outcome = m.outcome().text();
    }
    return r;
}

DebugSession::Step DebugSession::choose(bool branch) {
    Step r;
    if (!impl_) {
        r.ok = false;
        r.error = error_.empty() ? "session not started" : error_;
        return r;
    }
    SymMachine& m = *impl_->m;
    if (!m.fork_pending()) {
        r.ok = false;
        r.error = "not at a fork";
        return r;
    }
    m.choose(branch);
    return r;
}

std::string DebugSession::dump() const {
    if (!impl_) return "";
    return impl_->m->mem().dump();
}

const std::vector<std::string>& DebugSession::trace() const {
    static const std::vector<std::string> empty;
    if (!impl_) return empty;
    return impl_->m->trace();
}

}  // namespace fspvm::symexec
