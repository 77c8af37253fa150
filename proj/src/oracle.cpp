#include "fspvm/oracle.hpp"

#include <map>
#include <utility>

namespace fspvm::oracle {

using fether::ExecConfig;
using fether::FaultInfo;
using fether::FaultKind;
using fether::StopReason;
using germ::MachineAddress;
using germ::MemoryCell;
using germ::Value;
using ir::Int;

std::string RefOutcome::text() const {
    switch (kind) {
        case Kind::Normal: return "normal";
        case Kind::Thrown: return "thrown";
        case Kind::OutOfGas: return std::string("out of gas: ") + fether::stop_text(*stop);
        case Kind::Fault: {
            std::string s = std::string("fault: ") + fether::fault_text(fault->kind);
            if (!fault->detail.empty()) s += " (" + fault->detail + ")";
            return s;
        }
    }
    return "?";
}

namespace {

FaultKind mem_fault(germ::MemError::Code c) {
    switch (c) {
        case germ::MemError::Code::OutOfDomain: return FaultKind::OutOfDomain;
        case germ::MemError::Code::AuthDenied: return FaultKind::AuthDenied;
        case germ::MemError::Code::MapFailed: return FaultKind::UnboundAddress;
        default: return FaultKind::TypeConfusion;
    }
}

// Recursive big-step evaluator. All state lives in plain members mutated down
// the recursion; control effects (return, throw, fuel stop, fault) travel
// back up as a Flow value. Memory snapshots are ordinary copies.
struct RefEval {
    enum class Flow : uint8_t { Next, Returned, Thrown, Stopped, Faulted };

    const ExecConfig& cfg;

    std::map<std::string, ir::StructLayout> lib_layouts;
    std::map<std::string, ir::StmtPtr> funs;
    ir::StructRegistry structs;

    germ::Memory mem, entry;
    std::string contract_env, fenv;
    std::optional<std::string> in_function;
    uint64_t depth = 0;
    uint64_t gas = 0, gas_limit = 0;
    uint64_t stmt_budget = 0, node_budget = 0;
    uint64_t steps = 0;
    size_t script_at = 0;
    std::vector<std::string> pending;  // overflow notes of the active statement
    FaultInfo fault{FaultKind::TypeConfusion, "", 0};
    StopReason stop = StopReason::GasLimit;
    int line = 0;

    explicit RefEval(const ExecConfig& c) : cfg(c) {
        lib_layouts["msg"] = cfg.lib.msg_layout();
        lib_layouts["this"] = cfg.lib.address_layout();
        lib_layouts["block"] = cfg.lib.block_layout();
        contract_env = cfg.external_env;
        fenv = cfg.external_env;
    }

    void fresh_session(germ::Memory m0) {
        mem = std::move(m0);
        entry = mem;
        gas_limit = cfg.fuel.gas;
        gas = cfg.fuel.gas;
        stmt_budget = cfg.fuel.k_stmt;
        node_budget = cfg.fuel.k_val;
        steps = 0;
        script_at = 0;
        depth = 0;
        in_function.reset();
        fenv = cfg.external_env;
        pending.clear();
        line = 0;
    }

    RefOutcome finish(Flow f) {
        RefOutcome o;
        switch (f) {
            case Flow::Next:
            case Flow::Returned:
                o.kind = RefOutcome::Kind::Normal;
                o.memory = mem;
                break;
            case Flow::Thrown:
                o.kind = RefOutcome::Kind::Thrown;
                o.memory = entry;
                break;
            case Flow::Stopped:
                o.kind = RefOutcome::Kind::OutOfGas;
                o.stop = stop;
                o.memory = mem;
                break;
            case Flow::Faulted:
                o.kind = RefOutcome::Kind::Fault;
                o.fault = fault;
                o.memory = mem;
                break;
        }
        o.env.contract = contract_env;
        o.env.function = in_function;
        o.env.scope_depth = depth;
        o.env.gas = gas;
        o.env.gas_limit = gas_limit;
        o.gas_used = gas_limit - gas;
        o.steps = steps;
        return o;
    }

    // ------------------------------------------------------------------
    // Statements

    Flow block(const ir::Program& p) {
        for (const auto& s : p) {
            Flow f = stmt(s);
            if (f != Flow::Next) return f;
        }
        return Flow::Next;
    }

    // Charges one statement. Returns false when a budget is exhausted, gas
    // first.
    bool charge() {
        if (gas == 0) {
            stop = StopReason::GasLimit;
            return false;
        }
        if (stmt_budget == 0) {
            stop = StopReason::StepBudget;
            return false;
        }
        --gas;
        --stmt_budget;
        ++steps;
        node_budget = cfg.fuel.k_val;
        pending.clear();
        return true;
    }

    void flush() {
        for (auto& n : pending) {
            germ::Event ev;
            ev.kind = germ::Event::Kind::Overflow;
            ev.note = std::move(n);
            mem = mem.push_event(std::move(ev));
        }
        pending.clear();
    }

    Flow faulted(FaultKind k, std::string detail, int at = 0) {
        fault = FaultInfo{k, std::move(detail), at == 0 ? line : at};
        return Flow::Faulted;
    }

    Flow stmt(const ir::StmtPtr& s) {
        if (!s) return Flow::Next;
        if (s->kind == ir::Statement::Kind::Seq) return block(s->stmts);
        line = s->line;
        if (!charge()) return Flow::Stopped;
        switch (s->kind) {
            case ir::Statement::Kind::Nil:
                flush();
                return Flow::Next;
            case ir::Statement::Kind::Throw:
                return Flow::Thrown;
            case ir::Statement::Kind::StructDecl: {
                ir::StructLayout layout;
                for (const auto& [ty, name] : s->members) layout.emplace_back(name, ty);
                structs.layouts[s->name] = std::move(layout);
                flush();
                return Flow::Next;
            }
            case ir::Statement::Kind::Var:
                return var_decl(s);
            case ir::Statement::Kind::Assign:
                return assign(s);
            case ir::Statement::Kind::If: {
                auto c = eval(s->e1);
                if (c.fault) return carry(c);
                if (c.v->kind() != Value::Kind::BoolV)
                    return faulted(FaultKind::TypeConfusion, "condition", s->line);
                bool taken = c.v->bool_val();
                flush();
                return stmt(taken ? s->s1 : s->s2);
            }
            case ir::Statement::Kind::While:
                return loop(s->e1, {s->s1});
            case ir::Statement::Kind::For: {
                // The header charge was taken above; the init statement and
                // each condition check charge on their own.
                flush();
                Flow f = stmt(s->s1);
                if (f != Flow::Next) return f;
                return charged_loop(s->e1, {s->s3, s->s2});
            }
            case ir::Statement::Kind::Fun:
                return fun_decl(s);
            case ir::Statement::Kind::FunCall:
                return call_stmt(s);
            case ir::Statement::Kind::Return: {
                if (s->e1) {
                    auto r = eval(s->e1);
                    if (r.fault) return carry(r);
                }
                flush();
                return Flow::Returned;
            }
            case ir::Statement::Kind::Contract:
                return contract(s);
            case ir::Statement::Kind::Seq:
                return Flow::Next;  // unreachable; Seq never charges
        }
        return faulted(FaultKind::TypeConfusion, "statement kind");
    }

    // Condition check consuming the charge already taken for the While
    // statement itself, then one more per further round.
    Flow loop(const ir::ExprPtr& cond, const ir::Program& body) {
        for (;;) {
            auto c = eval(cond);
            if (c.fault) return carry(c);
            if (c.v->kind() != Value::Kind::BoolV)
                return faulted(FaultKind::TypeConfusion, "condition");
            bool again = c.v->bool_val();
            flush();
            if (!again) return Flow::Next;
            Flow f = block(body);
            if (f != Flow::Next) return f;
            if (!charge()) return Flow::Stopped;
        }
    }

    Flow charged_loop(const ir::ExprPtr& cond, const ir::Program& body) {
        if (!charge()) return Flow::Stopped;
        return loop(cond, body);
    }

    Flow var_decl(const ir::StmtPtr& s) {
        if (!s->e1 || s->e1->name.empty())
            return faulted(FaultKind::TypeConfusion, "declaration", s->line);
        auto addr = locate(s->e1->name);
        if (!addr) return Flow::Faulted;
        auto zero = germ::zero_value(s->e1->out_ty, structs);
        if (!zero)
            return faulted(FaultKind::TypeConfusion, "no zero value: " + s->e1->name,
                           s->line);
        MemoryCell cell;
        cell.v = std::move(*zero);
        cell.env = contract_env;
        cell.fenv = fenv;
        cell.occupied = true;
        cell.auth = auth_of(s->vis);
        mem = mem.write_cell(*addr, cell);
        flush();
        return Flow::Next;
    }

    Flow assign(const ir::StmtPtr& s) {
        auto rhs = eval(s->e2);
        if (rhs.fault) return carry(rhs);
        Path path;
        if (auto f = lvalue(s->e1, path)) {
            fault = std::move(*f);
            if (fault.line == 0) fault.line = line;
            return Flow::Faulted;
        }
        Value out;
        if (path.steps.empty()) {
            out = std::move(*rhs.v);
        } else {
            auto cur = mem.read(path.root, contract_env, fenv);
            if (!cur)
                return faulted(mem_fault(cur.error().code), cur.error().detail, s->line);
            if (cur.value().is_undef())
                return faulted(FaultKind::UndefUse, "assignment base", s->line);
            auto upd = rebuild(cur.value(), path.steps, 0, *rhs.v);
            if (upd.fault) return carry(upd);
            out = std::move(*upd.v);
        }
        auto wr = mem.write(path.root, std::move(out), contract_env, fenv);
        if (!wr) return faulted(mem_fault(wr.error().code), wr.error().detail, s->line);
        mem = wr.take();
        flush();
        return Flow::Next;
    }

    Flow fun_decl(const ir::StmtPtr& s) {
        if (!s->e1 || s->e1->name.empty())
            return faulted(FaultKind::TypeConfusion, "function name", s->line);
        const std::string& name = s->e1->name;
        funs[name] = s;
        auto addr = locate(name + "()");
        if (!addr) return Flow::Faulted;
        MemoryCell cell;
        cell.v = Value::statement_v(s);
        cell.env = contract_env;
        cell.fenv = fenv;
        cell.occupied = true;
        cell.auth = auth_of(s->vis);
        mem = mem.write_cell(*addr, cell);
        flush();
        return Flow::Next;
    }

    Flow contract(const ir::StmtPtr& s) {
        if (!s->e1 || s->e1->name.empty())
            return faulted(FaultKind::TypeConfusion, "contract name", s->line);
        const std::string& name = s->e1->name;
        contract_env = name;
        fenv = name;
        for (const auto& st : s->stmts) {
            if (!st || st->kind != ir::Statement::Kind::StructDecl) continue;
            ir::StructLayout layout;
            for (const auto& [ty, mname] : st->members) layout.emplace_back(mname, ty);
            structs.layouts[st->name] = std::move(layout);
        }
        auto lab = label_of(name);
        if (!lab) return faulted(FaultKind::UnboundAddress, name, s->line);
        auto addr = cfg.strategy.map(*lab);
        if (!addr) return faulted(mem_fault(addr.error().code), name, s->line);
        MemoryCell identity;
        identity.v = Value::ptr_contract(*lab);
        identity.env = identity.fenv = name;
        identity.occupied = true;
        mem = mem.write_cell(addr.value(), identity);
        MemoryCell latch;
        latch.v = Value::boolean(false);
        latch.env = latch.fenv = "lib";
        latch.occupied = true;
        mem = mem.write_cell(MachineAddress::special(ir::SpecialAddr::SendRe), latch);
        flush();
        return block(s->stmts);
    }

    Flow call_stmt(const ir::StmtPtr& s) {
        if (!s->e1 || s->e1->kind != ir::Expr::Kind::Fun)
            return faulted(FaultKind::TypeConfusion, "callee", s->line);
        const std::string& callee = s->e1->name;
        bool send_family = callee == germ::kSendBuiltin || callee == germ::kCallBuiltin ||
                           callee == germ::kTransferBuiltin;
        if (send_family) {
            if (s->args.size() != 2)
                return faulted(FaultKind::TypeConfusion, "send arguments", s->line);
            auto target = eval(s->args[0]);
            if (target.fault) return carry(target);
            auto amount = eval(s->args[1]);
            if (amount.fault) return carry(amount);
            bool verdict = send_verdict();
            MemoryCell latch;
            latch.v = Value::boolean(verdict);
            latch.env = latch.fenv = "lib";
            latch.occupied = true;
            mem = mem.write_cell(MachineAddress::special(ir::SpecialAddr::SendRe), latch);
            germ::Event ev;
            ev.kind = callee == germ::kSendBuiltin    ? germ::Event::Kind::Send
                      : callee == germ::kCallBuiltin ? germ::Event::Kind::Call
                                                     : germ::Event::Kind::Transfer;
            ev.target = std::move(*target.v);
            ev.amount = std::move(*amount.v);
            ev.result = verdict;
            mem = mem.push_event(std::move(ev));
            flush();
            return Flow::Next;
        }
        auto it = funs.find(callee);
        if (it == funs.end())
            return faulted(FaultKind::UnboundAddress, "function " + callee, s->line);
        std::vector<Value> vals;
        vals.reserve(s->args.size());
        for (const auto& a : s->args) {
            auto r = eval(a);
            if (r.fault) return carry(r);
            vals.push_back(std::move(*r.v));
        }
        flush();
        return invoke(it->second, std::move(vals), contract_env);
    }

    Flow invoke(const ir::StmtPtr& decl, std::vector<Value> args,
                const std::string& caller_env) {
        if (decl->args.size() != args.size())
            return faulted(FaultKind::TypeConfusion, "argument count", decl->line);
        for (size_t i = 0; i < args.size(); ++i) {
            auto addr = locate(decl->args[i]->name);
            if (!addr) return Flow::Faulted;
            MemoryCell cell;
            cell.v = std::move(args[i]);
            cell.env = contract_env;
            cell.fenv = contract_env;
            cell.occupied = true;
            mem = mem.write_cell(*addr, cell);
        }
        std::string saved_contract = contract_env;
        auto saved_function = in_function;
        uint64_t saved_depth = depth;
        std::string saved_fenv = fenv;
        in_function = decl->e1 ? std::optional<std::string>(decl->e1->name) : std::nullopt;
        depth += 1;
        fenv = caller_env;
        Flow f = block(decl->stmts);
        if (f == Flow::Next || f == Flow::Returned) {
            contract_env = std::move(saved_contract);
            in_function = std::move(saved_function);
            depth = saved_depth;
            fenv = std::move(saved_fenv);
            return Flow::Next;  // a return unwinds exactly to its call
        }
        return f;
    }

    // ------------------------------------------------------------------
    // Expressions

    struct Ev {
        std::optional<Value> v;
        std::optional<FaultInfo> fault;
    };

    static Ev val(Value v) { return Ev{std::move(v), std::nullopt}; }
    static Ev bad(FaultKind k, std::string detail) {
        return Ev{std::nullopt, FaultInfo{k, std::move(detail), 0}};
    }

    Flow carry(Ev& e) {
        fault = std::move(*e.fault);
        if (fault.line == 0) fault.line = line;
        return Flow::Faulted;
    }

    Ev eval(const ir::ExprPtr& e) {
        if (!e) return bad(FaultKind::TypeConfusion, "null expression");
        if (node_budget == 0) return bad(FaultKind::ExprFuelExhausted, "");
        --node_budget;
        switch (e->kind) {
            case ir::Expr::Kind::Const:
                return val(Value::from_literal(e->lit));
            case ir::Expr::Kind::Var:
            case ir::Expr::Kind::Par:
                return load(e->name);
            case ir::Expr::Kind::Fun: {
                if (auto lab = label_of(e->name)) return val(Value::ptr_fun(*lab));
                if (auto lab = label_of(e->name + "()")) return val(Value::ptr_fun(*lab));
                return bad(FaultKind::UnboundAddress, e->name);
            }
            case ir::Expr::Kind::Binop:
                return binop(*e);
            case ir::Expr::Kind::Unop:
                return unop(*e);
            case ir::Expr::Kind::Field:
                return field(*e);
            case ir::Expr::Kind::Index:
                return index(*e);
            case ir::Expr::Kind::StructLit: {
                std::vector<Value> vals;
                vals.reserve(e->members.size());
                for (const auto& [mname, sub] : e->members) {
                    (void)mname;
                    auto r = eval(sub);
                    if (r.fault) return r;
                    vals.push_back(std::move(*r.v));
                }
                return val(Value::struct_v(e->out_ty.name(), std::move(vals)));
            }
        }
        return bad(FaultKind::TypeConfusion, "expression kind");
    }

    Ev binop(const ir::Expr& e) {
        using B = ir::BinOp;
        if (e.bop == B::And || e.bop == B::Or) {
            auto l = eval(e.a);
            if (l.fault) return l;
            if (l.v->kind() != Value::Kind::BoolV)
                return bad(FaultKind::TypeConfusion, "logical operand");
            bool lv = l.v->bool_val();
            if (e.bop == B::And && !lv) return val(Value::boolean(false));
            if (e.bop == B::Or && lv) return val(Value::boolean(true));
            auto r = eval(e.b);
            if (r.fault) return r;
            if (r.v->kind() != Value::Kind::BoolV)
                return bad(FaultKind::TypeConfusion, "logical operand");
            return r;
        }
        auto l = eval(e.a);
        if (l.fault) return l;
        auto r = eval(e.b);
        if (r.fault) return r;
        if (e.bop == B::Eq) return val(Value::boolean(*l.v == *r.v));
        if (e.bop == B::Ne) return val(Value::boolean(*l.v != *r.v));
        if (l.v->kind() != Value::Kind::IntV || r.v->kind() != Value::Kind::IntV ||
            l.v->int_bits() != r.v->int_bits() || l.v->int_sign() != r.v->int_sign())
            return bad(FaultKind::TypeConfusion, e.bop == B::Lt || e.bop == B::Le ||
                                                         e.bop == B::Gt || e.bop == B::Ge
                                                     ? "comparison operands"
                                                     : "arithmetic operands");
        unsigned bits = l.v->int_bits();
        ir::Sign sign = l.v->int_sign();
        bool sg = sign == ir::Sign::Signed;
        Int a = sg ? l.v->int_signed() : l.v->int_mag();
        Int b = sg ? r.v->int_signed() : r.v->int_mag();
        switch (e.bop) {
            case B::Lt: return val(Value::boolean(a < b));
            case B::Le: return val(Value::boolean(a <= b));
            case B::Gt: return val(Value::boolean(a > b));
            case B::Ge: return val(Value::boolean(a >= b));
            default: break;
        }
        Int exact;
        switch (e.bop) {
            case B::Add: exact = a + b; break;
            case B::Sub: exact = a - b; break;
            case B::Mul: exact = a * b; break;
            case B::Div:
            case B::Mod: {
                if (b == 0) return bad(FaultKind::DivideByZero, ir::binop_text(e.bop));
                if (e.bop == B::Div) {
                    exact = a / b;
                } else {
                    exact = a % b;
                }
                break;
            }
            default:
                return bad(FaultKind::TypeConfusion, "operator");
        }
        Int wrapped = ir::wrap_int(exact, bits);
        Int canon = sg ? ir::to_signed(wrapped, bits) : wrapped;
        if (canon != exact) note(ir::binop_text(e.bop), bits, sign);
        return val(Value::integer(bits, sign, wrapped));
    }

    Ev unop(const ir::Expr& e) {
        if (e.uop == ir::UnOp::Cast) {
            auto r = eval(e.a);
            if (r.fault) return r;
            const ir::LType& target = e.out_ty;
            const Value& v = *r.v;
            if (target.is_int() && v.kind() == Value::Kind::IntV) {
                Int sv = v.int_sign() == ir::Sign::Signed ? v.int_signed() : v.int_mag();
                return val(Value::integer(target.bits(), target.sign(),
                                          ir::wrap_int(sv, target.bits())));
            }
            bool pass =
                (target.kind() == ir::LType::Kind::Bool && v.kind() == Value::Kind::BoolV) ||
                (target.kind() == ir::LType::Kind::String &&
                 v.kind() == Value::Kind::StringV) ||
                (target.kind() == ir::LType::Kind::Bytes && v.kind() == Value::Kind::BytesV) ||
                (target.kind() == ir::LType::Kind::Address && v.kind() == Value::Kind::BytesV);
            if (pass) return r;
            return bad(FaultKind::TypeConfusion, "cast");
        }
        auto r = eval(e.a);
        if (r.fault) return r;
        if (e.uop == ir::UnOp::Not) {
            if (r.v->kind() != Value::Kind::BoolV)
                return bad(FaultKind::TypeConfusion, "not");
            return val(Value::boolean(!r.v->bool_val()));
        }
        if (r.v->kind() != Value::Kind::IntV) return bad(FaultKind::TypeConfusion, "neg");
        unsigned bits = r.v->int_bits();
        ir::Sign sign = r.v->int_sign();
        bool sg = sign == ir::Sign::Signed;
        Int operand = sg ? r.v->int_signed() : r.v->int_mag();
        Int exact = -operand;
        Int wrapped = ir::wrap_int(exact, bits);
        Int canon = sg ? ir::to_signed(wrapped, bits) : wrapped;
        if (canon != exact) note("neg", bits, sign);
        return val(Value::integer(bits, sign, wrapped));
    }

    Ev field(const ir::Expr& e) {
        Value base;
        if (e.base_is_special) {
            auto rd = mem.read(MachineAddress::special(ir::special_ref_addr(e.sref)),
                               contract_env, fenv);
            if (!rd) return bad(mem_fault(rd.error().code), rd.error().detail);
            base = rd.take();
        } else {
            auto r = eval(e.a);
            if (r.fault) return r;
            base = std::move(*r.v);
        }
        for (const auto& m : e.path) {
            auto next = member(base, m);
            if (next.fault) return next;
            base = std::move(*next.v);
        }
        return val(std::move(base));
    }

    Ev member(const Value& v, const std::string& name) {
        if (v.kind() != Value::Kind::StructV)
            return bad(FaultKind::TypeConfusion, "member of non-struct");
        const ir::StructLayout* layout = layout_of(v.layout());
        if (!layout) return bad(FaultKind::TypeConfusion, "unknown layout " + v.layout());
        for (size_t i = 0; i < layout->size(); ++i) {
            if ((*layout)[i].first != name) continue;
            if (i >= v.members().size())
                return bad(FaultKind::TypeConfusion, "short struct value");
            return val(v.members()[i]);
        }
        return bad(FaultKind::TypeConfusion, "member " + name);
    }

    Ev index(const ir::Expr& e) {
        auto base = eval(e.a);
        if (base.fault) return base;
        auto key = eval(e.b);
        if (key.fault) return key;
        if (base.v->kind() == Value::Kind::MappingV) return val(base.v->map_get(*key.v));
        if (base.v->kind() == Value::Kind::ArrayV) {
            if (key.v->kind() != Value::Kind::IntV)
                return bad(FaultKind::TypeConfusion, "array index");
            if (key.v->int_sign() == ir::Sign::Signed && key.v->int_signed() < 0)
                return bad(FaultKind::IndexOutOfRange, key.v->text());
            const auto& items = base.v->items();
            if (key.v->int_mag() >= items.size())
                return bad(FaultKind::IndexOutOfRange, key.v->text());
            return val(items[key.v->int_mag().convert_to<size_t>()]);
        }
        return bad(FaultKind::TypeConfusion, "index base");
    }

    Ev load(const std::string& name) {
        auto addr = address_of(name);
        if (addr.fault) return Ev{std::nullopt, addr.fault};
        auto rd = mem.read(*addr.addr, contract_env, fenv);
        if (!rd) {
            std::string d = rd.error().detail.empty() ? name : rd.error().detail;
            return bad(mem_fault(rd.error().code), std::move(d));
        }
        if (rd.value().is_undef()) return bad(FaultKind::UndefUse, name);
        return val(rd.take());
    }

    // ------------------------------------------------------------------
    // Assignment targets

    struct PathStep {
        bool is_member = false;
        std::string member;
        Value key;
    };
    struct Path {
        MachineAddress root{};
        std::vector<PathStep> steps;
    };

    std::optional<FaultInfo> lvalue(const ir::ExprPtr& e, Path& out) {
        if (!e) return FaultInfo{FaultKind::TypeConfusion, "null assignment target", 0};
        switch (e->kind) {
            case ir::Expr::Kind::Var:
            case ir::Expr::Kind::Par: {
                auto addr = address_of(e->name);
                if (addr.fault) return addr.fault;
                out.root = *addr.addr;
                return std::nullopt;
            }
            case ir::Expr::Kind::Field: {
                if (e->base_is_special)
                    return FaultInfo{FaultKind::TypeConfusion,
                                     "reserved cell is read-only", 0};
                if (auto f = lvalue(e->a, out)) return f;
                for (const auto& m : e->path) {
                    PathStep step;
                    step.is_member = true;
                    step.member = m;
                    out.steps.push_back(std::move(step));
                }
                return std::nullopt;
            }
            case ir::Expr::Kind::Index: {
                if (auto f = lvalue(e->a, out)) return f;
                auto key = eval(e->b);
                if (key.fault) return key.fault;
                PathStep step;
                step.key = std::move(*key.v);
                out.steps.push_back(std::move(step));
                return std::nullopt;
            }
            default:
                return FaultInfo{FaultKind::TypeConfusion, "not assignable", 0};
        }
    }

    Ev rebuild(const Value& cur, const std::vector<PathStep>& steps, size_t i,
               const Value& v) {
        if (i == steps.size()) return val(v);
        if (cur.is_undef()) return bad(FaultKind::UndefUse, "update base");
        const PathStep& step = steps[i];
        if (step.is_member) {
            if (cur.kind() != Value::Kind::StructV)
                return bad(FaultKind::TypeConfusion, "member of non-struct");
            const ir::StructLayout* layout = layout_of(cur.layout());
            if (!layout)
                return bad(FaultKind::TypeConfusion, "unknown layout " + cur.layout());
            for (size_t k = 0; k < layout->size(); ++k) {
                if ((*layout)[k].first != step.member) continue;
                if (k >= cur.members().size())
                    return bad(FaultKind::TypeConfusion, "short struct value");
                auto inner = rebuild(cur.members()[k], steps, i + 1, v);
                if (inner.fault) return inner;
                return val(cur.with_member(k, std::move(*inner.v)));
            }
            return bad(FaultKind::TypeConfusion, "member " + step.member);
        }
        if (cur.kind() == Value::Kind::MappingV) {
            auto inner = rebuild(cur.map_get(step.key), steps, i + 1, v);
            if (inner.fault) return inner;
            return val(cur.map_set(step.key, std::move(*inner.v)));
        }
        if (cur.kind() == Value::Kind::ArrayV) {
            if (step.key.kind() != Value::Kind::IntV)
                return bad(FaultKind::TypeConfusion, "array index");
            if (step.key.int_sign() == ir::Sign::Signed && step.key.int_signed() < 0)
                return bad(FaultKind::IndexOutOfRange, step.key.text());
            if (step.key.int_mag() >= cur.items().size())
                return bad(FaultKind::IndexOutOfRange, step.key.text());
            size_t idx = step.key.int_mag().convert_to<size_t>();
            auto inner = rebuild(cur.items()[idx], steps, i + 1, v);
            if (inner.fault) return inner;
            return val(cur.with_item(idx, std::move(*inner.v)));
        }
        return bad(FaultKind::TypeConfusion, "index base");
    }

    // ------------------------------------------------------------------
    // Names, layouts, policy

    std::optional<ir::LabelAddress> label_of(const std::string& name) const {
        if (auto s = ir::special_by_name(name)) return ir::LabelAddress::at(*s);
        if (cfg.resolve) return cfg.resolve(name);
        return std::nullopt;
    }

    struct Located {
        std::optional<MachineAddress> addr;
        std::optional<FaultInfo> fault;
    };

    Located address_of(const std::string& name) const {
        auto lab = label_of(name);
        if (!lab)
            return {std::nullopt, FaultInfo{FaultKind::UnboundAddress, name, 0}};
        auto addr = cfg.strategy.map(*lab);
        if (!addr)
            return {std::nullopt, FaultInfo{mem_fault(addr.error().code), name, 0}};
        return {addr.value(), std::nullopt};
    }

    // address_of with the fault routed into the outcome, for statement sites.
    std::optional<MachineAddress> locate(const std::string& name) {
        auto r = address_of(name);
        if (r.fault) {
            fault = std::move(*r.fault);
            if (fault.line == 0) fault.line = line;
            return std::nullopt;
        }
        return r.addr;
    }

    const ir::StructLayout* layout_of(const std::string& name) const {
        if (const auto* l = structs.find(name)) return l;
        auto it = lib_layouts.find(name);
        return it == lib_layouts.end() ? nullptr : &it->second;
    }

    germ::Auth auth_of(const std::optional<ir::Visibility>& vis) const {
        germ::Auth a;
        if (!vis) return a;
        switch (*vis) {
            case ir::Visibility::Public: a.kind = germ::Auth::Kind::Public; break;
            case ir::Visibility::Internal: a.kind = germ::Auth::Kind::Internal; break;
            case ir::Visibility::Private:
                a.kind = germ::Auth::Kind::Owner;
                a.owner = contract_env;
                break;
        }
        return a;
    }

    bool send_verdict() {
        switch (cfg.sends.mode) {
            case fether::SendPolicy::Mode::AlwaysTrue: return true;
            case fether::SendPolicy::Mode::AlwaysFalse: return false;
            case fether::SendPolicy::Mode::Scripted:
                if (script_at < cfg.sends.script.size()) return cfg.sends.script[script_at++];
                return false;
        }
        return false;
    }

    void note(const char* op, unsigned bits, ir::Sign sign) {
        pending.push_back(std::string(op) + (sign == ir::Sign::Unsigned ? " u" : " s") +
                          std::to_string(bits));
    }
};

}  // namespace

RefOutcome ref_exec(const ir::Program& prog, germ::Memory m0,
                    const fether::ExecConfig& cfg) {
    RefEval r(cfg);
    r.fresh_session(std::move(m0));
    return r.finish(r.block(prog));
}

RefOutcome ref_call(const ir::Program& prog, const std::string& function,
                    const std::vector<germ::Value>& args, germ::Memory m0,
                    const fether::ExecConfig& cfg) {
    RefEval r(cfg);
    r.fresh_session(std::move(m0));
    RefEval::Flow f = r.block(prog);
    if (f != RefEval::Flow::Next && f != RefEval::Flow::Returned) return r.finish(f);
    r.fresh_session(r.mem);
    auto it = r.funs.find(function);
    if (it == r.funs.end()) {
        r.fault = FaultInfo{FaultKind::UnboundAddress, "function " + function, 0};
        return r.finish(RefEval::Flow::Faulted);
    }
    return r.finish(r.invoke(it->second, args, cfg.external_env));
}

// ---------------------------------------------------------------------------
// Outcome relation

namespace {

std::string first_memory_diff(const germ::Memory& a, const germ::Memory& b) {
    if (a.throw_flag() != b.throw_flag()) return "throw flag";
    size_t span = std::max(a.space(), b.space()) + ir::kSpecialCount;
    for (size_t i = 0; i < span; ++i) {
        MachineAddress at{static_cast<uint32_t>(i)};
        if (a.cell(at) == b.cell(at)) continue;
        return "cell " + at.text() + ": " + a.cell(at).v.text() + " vs " +
               b.cell(at).v.text();
    }
    auto ea = a.events();
    auto eb = b.events();
    if (ea.size() != eb.size())
        return "event count " + std::to_string(ea.size()) + " vs " +
               std::to_string(eb.size());
    for (size_t i = 0; i < ea.size(); ++i)
        if (!(ea[i] == eb[i]))
            return "event " + std::to_string(i) + ": " + ea[i].text() + " vs " +
                   eb[i].text();
    return "space " + std::to_string(a.space()) + " vs " + std::to_string(b.space());
}

}  // namespace

std::optional<Divergence> relate(const fether::ExecOutcome& left,
                                 const RefOutcome& right) {
    using Kind = fether::ExecOutcome::Kind;
    if (left.kind != right.kind)
        return Divergence{"outcome", left.text(), right.text()};
    if (left.kind == Kind::Fault && left.fault->kind != right.fault->kind)
        return Divergence{"fault kind", fether::fault_text(left.fault->kind),
                          fether::fault_text(right.fault->kind)};
    if (left.kind == Kind::OutOfGas && *left.stop != *right.stop)
        return Divergence{"stop reason", fether::stop_text(*left.stop),
                          fether::stop_text(*right.stop)};
    // Partial memories of abnormal stops are not observable; final and
    // rollback images are.
    if ((left.kind == Kind::Normal || left.kind == Kind::Thrown) &&
        left.memory != right.memory)
        return Divergence{"memory", first_memory_diff(left.memory, right.memory), ""};
    if (left.gas_used != right.gas_used)
        return Divergence{"gas", std::to_string(left.gas_used),
                          std::to_string(right.gas_used)};
    if (left.steps != right.steps)
        return Divergence{"steps", std::to_string(left.steps),
                          std::to_string(right.steps)};
    return std::nullopt;
}

std::optional<Divergence> check_equiv(const ir::Program& prog, const germ::Memory& m0,
                                      const fether::ExecConfig& cfg) {
    fether::Machine machine(cfg);
    auto left = machine.run(prog, m0);
    auto right = ref_exec(prog, m0, cfg);
    return relate(left, right);
}

std::optional<Divergence> check_equiv_call(const ir::Program& prog,
                                           const std::string& function,
                                           const std::vector<germ::Value>& args,
                                           const germ::Memory& m0,
                                           const fether::ExecConfig& cfg) {
    fether::Machine machine(cfg);
    auto deployed = machine.run(prog, m0);
    auto left = deployed.normal() ? machine.call(function, args, deployed.memory)
                                  : deployed;
    auto right = ref_call(prog, function, args, m0, cfg);
    return relate(left, right);
}

}  // namespace fspvm::oracle
