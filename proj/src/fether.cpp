#include "fspvm/fether.hpp"

#include <utility>

namespace fspvm::fether {

using germ::MachineAddress;
using germ::MemoryCell;
using germ::Value;
using ir::Int;

const char* fault_text(FaultKind k) {
    switch (k) {
        case FaultKind::DivideByZero: return "divide by zero";
        case FaultKind::UndefUse: return "undefined value use";
        case FaultKind::UnboundAddress: return "unbound address";
        case FaultKind::AuthDenied: return "authorization denied";
        case FaultKind::OutOfDomain: return "address out of domain";
        case FaultKind::IndexOutOfRange: return "index out of range";
        case FaultKind::ExprFuelExhausted: return "expression fuel exhausted";
        case FaultKind::TypeConfusion: return "type confusion";
    }
    return "?";
}

const char* stop_text(StopReason r) {
    return r == StopReason::GasLimit ? "gas limit" : "step budget";
}

std::string ExecOutcome::text() const {
    switch (kind) {
        case Kind::Normal: return "normal";
        case Kind::Thrown: return "thrown";
        case Kind::OutOfGas: return std::string("out of gas: ") + stop_text(*stop);
        case Kind::Fault: {
            std::string s = std::string("fault: ") + fault_text(fault->kind);
            if (!fault->detail.empty()) s += " (" + fault->detail + ")";
            return s;
        }
    }
    return "?";
}

std::optional<germ::Memory> as_option(const ExecOutcome& o) {
    if (o.kind == ExecOutcome::Kind::Normal || o.kind == ExecOutcome::Kind::Thrown)
        return o.memory;
    return std::nullopt;
}

static FaultKind fault_from(germ::MemError::Code c) {
    switch (c) {
        case germ::MemError::Code::OutOfDomain: return FaultKind::OutOfDomain;
        case germ::MemError::Code::AuthDenied: return FaultKind::AuthDenied;
        case germ::MemError::Code::MapFailed: return FaultKind::UnboundAddress;
        default: return FaultKind::TypeConfusion;
    }
}

Machine::EvalOut Machine::EvalOut::ok(Value val) {
    EvalOut r;
    r.v = std::move(val);
    return r;
}

Machine::EvalOut Machine::EvalOut::fail(FaultKind k, std::string detail) {
    EvalOut r;
    r.fault = FaultInfo{k, std::move(detail), 0};
    return r;
}

Machine::Machine(ExecConfig cfg) : cfg_(std::move(cfg)) {
    lib_layouts_["msg"] = cfg_.lib.msg_layout();
    lib_layouts_["this"] = cfg_.lib.address_layout();
    lib_layouts_["block"] = cfg_.lib.block_layout();
    env_.contract = cfg_.external_env;
    fenv_ = cfg_.external_env;
}

const ir::StmtPtr* Machine::function_decl(const std::string& name) const {
    auto it = funs_.find(name);
    return it == funs_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Session control

void Machine::begin_session(germ::Memory m0) {
    mem_ = std::move(m0);
    entry_ = mem_;
    tasks_.clear();
    outcome_.reset();
    notes_.clear();
    env_.gas_limit = cfg_.fuel.gas;
    env_.gas = cfg_.fuel.gas;
    env_.scope_depth = 0;
    env_.function.reset();
    fenv_ = cfg_.external_env;
    k_stmt_left_ = cfg_.fuel.k_stmt;
    k_val_left_ = cfg_.fuel.k_val;
    steps_ = 0;
    script_pos_ = 0;
    cur_line_ = 0;
}

void Machine::start(const ir::Program& prog, germ::Memory m0) {
    begin_session(std::move(m0));
    push_block(prog);
}

void Machine::start_call(const std::string& function,
                         const std::vector<germ::Value>& args, germ::Memory m0) {
    begin_session(std::move(m0));
    auto it = funs_.find(function);
    if (it == funs_.end()) {
        finish_fault({FaultKind::UnboundAddress, "function " + function, 0});
        return;
    }
    begin_function(it->second, args, cfg_.external_env);
}

ExecOutcome Machine::run(const ir::Program& prog, germ::Memory m0) {
    start(prog, std::move(m0));
    while (!outcome_) step();
    return *outcome_;
}

ExecOutcome Machine::exec_stmt(const ir::StmtPtr& s, germ::Memory m0) {
    return run(ir::Program{s}, std::move(m0));
}

ExecOutcome Machine::call(const std::string& function,
                          const std::vector<germ::Value>& args, germ::Memory m0) {
    start_call(function, args, std::move(m0));
    while (!outcome_) step();
    return *outcome_;
}

void Machine::push_block(const ir::Program& p) {
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        if (!*it) continue;
        Task t;
        t.s = *it;
        tasks_.push_back(std::move(t));
    }
}

StepInfo Machine::step() {
    StepInfo info;
    if (outcome_) {
        info.finished = true;
        return info;
    }
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
        // Chargeable unit: gas is checked before the step, so exhaustion
        // stops the machine instead of executing on a zero balance.
        cur_line_ = t.s->line;
        if (env_.gas == 0) {
            finish_stop(StopReason::GasLimit);
            break;
        }
        if (k_stmt_left_ == 0) {
            finish_stop(StopReason::StepBudget);
            break;
        }
        --env_.gas;
        --k_stmt_left_;
        ++steps_;
        k_val_left_ = cfg_.fuel.k_val;
        notes_.clear();
        info.executed = t.s;
        if (t.k == Task::K::Loop) {
            loop_check(t.s, info);
        } else {
            exec(t.s, info);
        }
        if (!outcome_) flush_notes();
        break;
    }
    if (!outcome_ && !info.executed) finish_normal();
    info.finished = outcome_.has_value();
    return info;
}

// ---------------------------------------------------------------------------
// Statement execution

void Machine::exec(const ir::StmtPtr& s, StepInfo& info) {
    using K = ir::Statement::Kind;
    switch (s->kind) {
        case K::Nil:
            return;
        case K::Seq:
            push_block(s->stmts);  // unreachable via step(), kept total
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
            if (bail(c)) return;
            if (c.v->kind() != Value::Kind::BoolV) {
                finish_fault({FaultKind::TypeConfusion, "condition", s->line});
                return;
            }
            bool taken = c.v->bool_val();
            info.branch = taken;
            const ir::StmtPtr& branch = taken ? s->s1 : s->s2;
            if (branch) {
                Task t;
                t.s = branch;
                tasks_.push_back(std::move(t));
            }
            return;
        }
        case K::While:
            loop_check(s, info);
            return;
        case K::For: {
            // One charge for the header, then the loop re-checks per
            // iteration like a plain While over body-then-step.
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
                if (bail(r)) return;  // value computed, then discarded
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

void Machine::loop_check(const ir::StmtPtr& w, StepInfo& info) {
    auto c = eval(w->e1);
    if (bail(c)) return;
    if (c.v->kind() != Value::Kind::BoolV) {
        finish_fault({FaultKind::TypeConfusion, "condition", w->line});
        return;
    }
    bool again = c.v->bool_val();
    info.branch = again;
    if (!again) return;
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

void Machine::register_struct(const ir::StmtPtr& s) {
    ir::StructLayout layout;
    for (const auto& [ty, name] : s->members) layout.emplace_back(name, ty);
    structs_.layouts[s->name] = std::move(layout);
}

void Machine::exec_contract(const ir::StmtPtr& s) {
    if (!s->e1 || s->e1->name.empty()) {
        finish_fault({FaultKind::TypeConfusion, "contract name", s->line});
        return;
    }
    const std::string& name = s->e1->name;
    env_.contract = name;
    fenv_ = name;
    // Layouts first, so state declarations of struct type can be zeroed
    // regardless of declaration order.
    for (const auto& st : s->stmts)
        if (st && st->kind == ir::Statement::Kind::StructDecl) register_struct(st);
    std::optional<FaultInfo> f;
    auto addr = map_or_fault(name, f);
    if (!addr) {
        finish_fault(std::move(*f));
        return;
    }
    MemoryCell identity;
    identity.v = Value::ptr_contract(*resolve_name(name));
    identity.env = identity.fenv = name;
    identity.occupied = true;
    mem_ = mem_.write_cell(*addr, identity);
    // The send-result latch starts defined: false until the first send.
    MemoryCell latch;
    latch.v = Value::boolean(false);
    latch.env = latch.fenv = "lib";
    latch.occupied = true;
    mem_ = mem_.write_cell(MachineAddress::special(ir::SpecialAddr::SendRe), latch);
    push_block(s->stmts);
}

void Machine::exec_fun_decl(const ir::StmtPtr& s) {
    if (!s->e1 || s->e1->name.empty()) {
        finish_fault({FaultKind::TypeConfusion, "function name", s->line});
        return;
    }
    const std::string& name = s->e1->name;
    funs_[name] = s;
    std::optional<FaultInfo> f;
    auto addr = map_or_fault(name + "()", f);
    if (!addr) {
        finish_fault(std::move(*f));
        return;
    }
    MemoryCell cell;
    cell.v = Value::statement_v(s);
    cell.env = env_.contract;
    cell.fenv = fenv_;
    cell.occupied = true;
    cell.auth = auth_for(s->vis);
    mem_ = mem_.write_cell(*addr, cell);
}

void Machine::exec_var_decl(const ir::StmtPtr& s) {
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
        finish_fault({FaultKind::TypeConfusion, "no zero value: " + s->e1->name, s->line});
        return;
    }
    MemoryCell cell;
    cell.v = std::move(*zero);
    cell.env = env_.contract;
    cell.fenv = fenv_;
    cell.occupied = true;
    cell.auth = auth_for(s->vis);
    mem_ = mem_.write_cell(*addr, cell);
}

void Machine::exec_assign(const ir::StmtPtr& s) {
    auto rhs = eval(s->e2);
    if (bail(rhs)) return;
    LRef ref;
    if (auto f = resolve_lvalue(s->e1, ref)) {
        finish_fault(std::move(*f));
        return;
    }
    Value out;
    if (ref.accs.empty()) {
        out = std::move(*rhs.v);
    } else {
        auto cur = mem_.read(ref.root, env_.contract, fenv_);
        if (!cur) {
            finish_fault({fault_from(cur.error().code), cur.error().detail, s->line});
            return;
        }
        if (cur.value().is_undef()) {
            finish_fault({FaultKind::UndefUse, "assignment base", s->line});
            return;
        }
        auto upd = update_at(cur.value(), ref.accs, 0, *rhs.v);
        if (bail(upd)) return;
        out = std::move(*upd.v);
    }
    auto wr = mem_.write(ref.root, std::move(out), env_.contract, fenv_);
    if (!wr) {
        finish_fault({fault_from(wr.error().code), wr.error().detail, s->line});
        return;
    }
    mem_ = wr.take();
}

void Machine::exec_call(const ir::StmtPtr& s) {
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
        if (bail(target)) return;
        auto amount = eval(s->args[1]);
        if (bail(amount)) return;
        bool verdict = next_send_verdict();
        MemoryCell latch;
        latch.v = Value::boolean(verdict);
        latch.env = latch.fenv = "lib";
        latch.occupied = true;
        mem_ = mem_.write_cell(MachineAddress::special(ir::SpecialAddr::SendRe), latch);
        germ::Event ev;
        ev.kind = is_send ? germ::Event::Kind::Send
                          : is_call ? germ::Event::Kind::Call : germ::Event::Kind::Transfer;
        ev.target = std::move(*target.v);
        ev.amount = std::move(*amount.v);
        ev.result = verdict;
        mem_ = mem_.push_event(std::move(ev));
        return;
    }
    auto it = funs_.find(callee);
    if (it == funs_.end()) {
        finish_fault({FaultKind::UnboundAddress, "function " + callee, s->line});
        return;
    }
    std::vector<Value> vals;
    vals.reserve(s->args.size());
    for (const auto& a : s->args) {
        auto r = eval(a);
        if (bail(r)) return;
        vals.push_back(std::move(*r.v));
    }
    begin_function(it->second, std::move(vals), env_.contract);
}

void Machine::begin_function(const ir::StmtPtr& decl, std::vector<germ::Value> args,
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
        MemoryCell cell;
        cell.v = std::move(args[i]);
        cell.env = env_.contract;
        cell.fenv = env_.contract;
        cell.occupied = true;
        mem_ = mem_.write_cell(*addr, cell);
    }
    Task restore;
    restore.k = Task::K::Restore;
    restore.contract = env_.contract;
    restore.function = env_.function;
    restore.depth = env_.scope_depth;
    restore.fenv = fenv_;
    tasks_.push_back(std::move(restore));
    env_.function = decl->e1 ? std::optional<std::string>(decl->e1->name) : std::nullopt;
    env_.scope_depth += 1;
    fenv_ = caller_env;
    push_block(decl->stmts);
}

void Machine::unwind_return() {
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

// ---------------------------------------------------------------------------
// Expression evaluation

Machine::EvalOut Machine::eval(const ir::ExprPtr& e) {
    if (!e) return EvalOut::fail(FaultKind::TypeConfusion, "null expression");
    if (k_val_left_ == 0) return EvalOut::fail(FaultKind::ExprFuelExhausted, "");
    --k_val_left_;
    using K = ir::Expr::Kind;
    switch (e->kind) {
        case K::Const:
            return EvalOut::ok(Value::from_literal(e->lit));
        case K::Var:
        case K::Par:
            return read_name(e->name);
        case K::Fun: {
            if (auto lab = resolve_name(e->name)) return EvalOut::ok(Value::ptr_fun(*lab));
            if (auto lab = resolve_name(e->name + "()"))
                return EvalOut::ok(Value::ptr_fun(*lab));
            return EvalOut::fail(FaultKind::UnboundAddress, e->name);
        }
        case K::Binop:
            return eval_binop(*e);
        case K::Unop: {
            if (e->uop == ir::UnOp::Cast) {
                auto r = eval(e->a);
                if (r.fault) return r;
                const ir::LType& target = e->out_ty;
                const Value& v = *r.v;
                if (target.is_int() && v.kind() == Value::Kind::IntV) {
                    Int sv = v.int_sign() == ir::Sign::Signed ? v.int_signed() : v.int_mag();
                    return EvalOut::ok(Value::integer(target.bits(), target.sign(),
                                                      ir::wrap_int(sv, target.bits())));
                }
                bool pass =
                    (target.kind() == ir::LType::Kind::Bool && v.kind() == Value::Kind::BoolV) ||
                    (target.kind() == ir::LType::Kind::String && v.kind() == Value::Kind::StringV) ||
                    (target.kind() == ir::LType::Kind::Bytes && v.kind() == Value::Kind::BytesV) ||
                    (target.kind() == ir::LType::Kind::Address && v.kind() == Value::Kind::BytesV);
                if (pass) return r;
                return EvalOut::fail(FaultKind::TypeConfusion, "cast");
            }
            auto r = eval(e->a);
            if (r.fault) return r;
            if (e->uop == ir::UnOp::Not) {
                if (r.v->kind() != Value::Kind::BoolV)
                    return EvalOut::fail(FaultKind::TypeConfusion, "not");
                return EvalOut::ok(Value::boolean(!r.v->bool_val()));
            }
            // Neg: modular negation in the operand's width.
            if (r.v->kind() != Value::Kind::IntV)
                return EvalOut::fail(FaultKind::TypeConfusion, "neg");
            unsigned bits = r.v->int_bits();
            ir::Sign sign = r.v->int_sign();
            bool sg = sign == ir::Sign::Signed;
            Int operand = sg ? r.v->int_signed() : r.v->int_mag();
            Int exact = -operand;
            Int wrapped = ir::wrap_int(exact, bits);
            Int canon = sg ? ir::to_signed(wrapped, bits) : wrapped;
            if (canon != exact) note_overflow("neg", bits, sign);
            return EvalOut::ok(Value::integer(bits, sign, wrapped));
        }
        case K::Field: {
            Value base;
            if (e->base_is_special) {
                auto rd = mem_.read(MachineAddress::special(ir::special_ref_addr(e->sref)),
                                    env_.contract, fenv_);
                if (!rd)
                    return EvalOut::fail(fault_from(rd.error().code), rd.error().detail);
                base = rd.take();
            } else {
                auto r = eval(e->a);
                if (r.fault) return r;
                base = std::move(*r.v);
            }
            EvalOut cur = EvalOut::ok(std::move(base));
            for (const auto& m : e->path) {
                cur = member_of(*cur.v, m);
                if (cur.fault) return cur;
            }
            return cur;
        }
        case K::Index: {
            auto base = eval(e->a);
            if (base.fault) return base;
            auto key = eval(e->b);
            if (key.fault) return key;
            if (base.v->kind() == Value::Kind::MappingV)
                return EvalOut::ok(base.v->map_get(*key.v));
            if (base.v->kind() == Value::Kind::ArrayV) {
                if (key.v->kind() != Value::Kind::IntV)
                    return EvalOut::fail(FaultKind::TypeConfusion, "array index");
                if (key.v->int_sign() == ir::Sign::Signed && key.v->int_signed() < 0)
                    return EvalOut::fail(FaultKind::IndexOutOfRange, key.v->text());
                const auto& items = base.v->items();
                if (key.v->int_mag() >= items.size())
                    return EvalOut::fail(FaultKind::IndexOutOfRange, key.v->text());
                return EvalOut::ok(items[key.v->int_mag().convert_to<size_t>()]);
            }
            return EvalOut::fail(FaultKind::TypeConfusion, "index base");
        }
        case K::StructLit: {
            std::vector<Value> vals;
            vals.reserve(e->members.size());
            for (const auto& [name, sub] : e->members) {
                (void)name;
                auto r = eval(sub);
                if (r.fault) return r;
                vals.push_back(std::move(*r.v));
            }
            return EvalOut::ok(Value::struct_v(e->out_ty.name(), std::move(vals)));
        }
    }
    return EvalOut::fail(FaultKind::TypeConfusion, "expression kind");
}

Machine::EvalOut Machine::eval_binop(const ir::Expr& e) {
    using B = ir::BinOp;
    if (e.bop == B::And || e.bop == B::Or) {
        auto l = eval(e.a);
        if (l.fault) return l;
        if (l.v->kind() != Value::Kind::BoolV)
            return EvalOut::fail(FaultKind::TypeConfusion, "logical operand");
        bool lv = l.v->bool_val();
        // Short circuit: the skipped operand costs no expression fuel.
        if (e.bop == B::And && !lv) return EvalOut::ok(Value::boolean(false));
        if (e.bop == B::Or && lv) return EvalOut::ok(Value::boolean(true));
        auto r = eval(e.b);
        if (r.fault) return r;
        if (r.v->kind() != Value::Kind::BoolV)
            return EvalOut::fail(FaultKind::TypeConfusion, "logical operand");
        return r;
    }
    auto l = eval(e.a);
    if (l.fault) return l;
    auto r = eval(e.b);
    if (r.fault) return r;
    switch (e.bop) {
        case B::Eq:
            return EvalOut::ok(Value::boolean(*l.v == *r.v));
        case B::Ne:
            return EvalOut::ok(Value::boolean(*l.v != *r.v));
        case B::Lt:
        case B::Le:
        case B::Gt:
        case B::Ge:
            return compare(e.bop, *l.v, *r.v);
        default:
            return arith(e.bop, *l.v, *r.v);
    }
}

Machine::EvalOut Machine::compare(ir::BinOp op, const Value& l, const Value& r) {
    if (l.kind() != Value::Kind::IntV || r.kind() != Value::Kind::IntV ||
        l.int_bits() != r.int_bits() || l.int_sign() != r.int_sign())
        return EvalOut::fail(FaultKind::TypeConfusion, "comparison operands");
    bool sg = l.int_sign() == ir::Sign::Signed;
    Int a = sg ? l.int_signed() : l.int_mag();
    Int b = sg ? r.int_signed() : r.int_mag();
    bool res = false;
    switch (op) {
        case ir::BinOp::Lt: res = a < b; break;
        case ir::BinOp::Le: res = a <= b; break;
        case ir::BinOp::Gt: res = a > b; break;
        case ir::BinOp::Ge: res = a >= b; break;
        default: break;
    }
    return EvalOut::ok(Value::boolean(res));
}

Machine::EvalOut Machine::arith(ir::BinOp op, const Value& l, const Value& r) {
    if (l.kind() != Value::Kind::IntV || r.kind() != Value::Kind::IntV ||
        l.int_bits() != r.int_bits() || l.int_sign() != r.int_sign())
        return EvalOut::fail(FaultKind::TypeConfusion, "arithmetic operands");
    unsigned bits = l.int_bits();
    ir::Sign sign = l.int_sign();
    bool sg = sign == ir::Sign::Signed;
    Int a = sg ? l.int_signed() : l.int_mag();
    Int b = sg ? r.int_signed() : r.int_mag();
    Int exact;
    switch (op) {
        case ir::BinOp::Add: exact = a + b; break;
        case ir::BinOp::Sub: exact = a - b; break;
        case ir::BinOp::Mul: exact = a * b; break;
        case ir::BinOp::Div:
        case ir::BinOp::Mod:
            if (b == 0) return EvalOut::fail(FaultKind::DivideByZero, ir::binop_text(op));
            // cpp_int divides truncating toward zero; remainder follows the
            // dividend, matching the source language.
            if (op == ir::BinOp::Div) {
                exact = a / b;
            } else {
                exact = a % b;
            }
            break;
        default:
            return EvalOut::fail(FaultKind::TypeConfusion, "operator");
    }
    Int wrapped = ir::wrap_int(exact, bits);
    Int canon = sg ? ir::to_signed(wrapped, bits) : wrapped;
    if (canon != exact) note_overflow(ir::binop_text(op), bits, sign);
    return EvalOut::ok(Value::integer(bits, sign, wrapped));
}

Machine::EvalOut Machine::read_name(const std::string& name) {
    std::optional<FaultInfo> f;
    auto addr = map_or_fault(name, f);
    if (!addr) return EvalOut{std::nullopt, std::move(f)};
    auto rd = mem_.read(*addr, env_.contract, fenv_);
    if (!rd) {
        std::string d = rd.error().detail.empty() ? name : rd.error().detail;
        return EvalOut::fail(fault_from(rd.error().code), std::move(d));
    }
    if (rd.value().is_undef()) return EvalOut::fail(FaultKind::UndefUse, name);
    return EvalOut::ok(rd.take());
}

Machine::EvalOut Machine::member_of(const Value& v, const std::string& name) {
    if (v.kind() != Value::Kind::StructV)
        return EvalOut::fail(FaultKind::TypeConfusion, "member of non-struct");
    const ir::StructLayout* layout = layout_of(v.layout());
    if (!layout)
        return EvalOut::fail(FaultKind::TypeConfusion, "unknown layout " + v.layout());
    for (size_t i = 0; i < layout->size(); ++i) {
        if ((*layout)[i].first == name) {
            if (i >= v.members().size())
                return EvalOut::fail(FaultKind::TypeConfusion, "short struct value");
            return EvalOut::ok(v.members()[i]);
        }
    }
    return EvalOut::fail(FaultKind::TypeConfusion, "member " + name);
}

std::optional<FaultInfo> Machine::resolve_lvalue(const ir::ExprPtr& e, LRef& out) {
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
                return FaultInfo{FaultKind::TypeConfusion, "reserved cell is read-only", 0};
            if (auto f = resolve_lvalue(e->a, out)) return f;
            for (const auto& m : e->path) {
                Accessor acc;
                acc.is_member = true;
                acc.member = m;
                out.accs.push_back(std::move(acc));
            }
            return std::nullopt;
        }
        case ir::Expr::Kind::Index: {
            if (auto f = resolve_lvalue(e->a, out)) return f;
            auto key = eval(e->b);
            if (key.fault) return key.fault;
            Accessor acc;
            acc.key = std::move(*key.v);
            out.accs.push_back(std::move(acc));
            return std::nullopt;
        }
        default:
            return FaultInfo{FaultKind::TypeConfusion, "not assignable", 0};
    }
}

Machine::EvalOut Machine::update_at(const Value& cur, const std::vector<Accessor>& accs,
                                    size_t i, const Value& v) {
    if (i == accs.size()) return EvalOut::ok(v);
    const Accessor& acc = accs[i];
    if (cur.is_undef()) return EvalOut::fail(FaultKind::UndefUse, "update base");
    if (acc.is_member) {
        if (cur.kind() != Value::Kind::StructV)
            return EvalOut::fail(FaultKind::TypeConfusion, "member of non-struct");
        const ir::StructLayout* layout = layout_of(cur.layout());
        if (!layout)
            return EvalOut::fail(FaultKind::TypeConfusion, "unknown layout " + cur.layout());
        for (size_t k = 0; k < layout->size(); ++k) {
            if ((*layout)[k].first != acc.member) continue;
            if (k >= cur.members().size())
                return EvalOut::fail(FaultKind::TypeConfusion, "short struct value");
            auto inner = update_at(cur.members()[k], accs, i + 1, v);
            if (inner.fault) return inner;
            return EvalOut::ok(cur.with_member(k, std::move(*inner.v)));
        }
        return EvalOut::fail(FaultKind::TypeConfusion, "member " + acc.member);
    }
    if (cur.kind() == Value::Kind::MappingV) {
        auto inner = update_at(cur.map_get(acc.key), accs, i + 1, v);
        if (inner.fault) return inner;
        return EvalOut::ok(cur.map_set(acc.key, std::move(*inner.v)));
    }
    if (cur.kind() == Value::Kind::ArrayV) {
        if (acc.key.kind() != Value::Kind::IntV)
            return EvalOut::fail(FaultKind::TypeConfusion, "array index");
        if (acc.key.int_sign() == ir::Sign::Signed && acc.key.int_signed() < 0)
            return EvalOut::fail(FaultKind::IndexOutOfRange, acc.key.text());
        if (acc.key.int_mag() >= cur.items().size())
            return EvalOut::fail(FaultKind::IndexOutOfRange, acc.key.text());
        size_t idx = acc.key.int_mag().convert_to<size_t>();
        auto inner = update_at(cur.items()[idx], accs, i + 1, v);
        if (inner.fault) return inner;
        return EvalOut::ok(cur.with_item(idx, std::move(*inner.v)));
    }
    return EvalOut::fail(FaultKind::TypeConfusion, "index base");
}

// ---------------------------------------------------------------------------
// Support

std::optional<ir::LabelAddress> Machine::resolve_name(const std::string& name) const {
    if (auto s = ir::special_by_name(name)) return ir::LabelAddress::at(*s);
    if (cfg_.resolve) return cfg_.resolve(name);
    return std::nullopt;
}

std::optional<germ::MachineAddress> Machine::map_or_fault(
    const std::string& name, std::optional<FaultInfo>& out) const {
    auto lab = resolve_name(name);
    if (!lab) {
        out = FaultInfo{FaultKind::UnboundAddress, name, 0};
        return std::nullopt;
    }
    auto addr = cfg_.strategy.map(*lab);
    if (!addr) {
        out = FaultInfo{fault_from(addr.error().code), name, 0};
        return std::nullopt;
    }
    return addr.value();
}

const ir::StructLayout* Machine::layout_of(const std::string& name) const {
    if (const auto* l = structs_.find(name)) return l;
    auto it = lib_layouts_.find(name);
    return it == lib_layouts_.end() ? nullptr : &it->second;
}

germ::Auth Machine::auth_for(const std::optional<ir::Visibility>& vis) const {
    germ::Auth a;
    if (!vis) return a;  // locals: public
    switch (*vis) {
        case ir::Visibility::Public:
            a.kind = germ::Auth::Kind::Public;
            break;
        case ir::Visibility::Internal:
            a.kind = germ::Auth::Kind::Internal;
            break;
        case ir::Visibility::Private:
            a.kind = germ::Auth::Kind::Owner;
            a.owner = env_.contract;
            break;
    }
    return a;
}

bool Machine::next_send_verdict() {
    switch (cfg_.sends.mode) {
        case SendPolicy::Mode::AlwaysTrue: return true;
        case SendPolicy::Mode::AlwaysFalse: return false;
        case SendPolicy::Mode::Scripted:
            if (script_pos_ < cfg_.sends.script.size()) return cfg_.sends.script[script_pos_++];
            return false;
    }
    return false;
}

void Machine::note_overflow(const char* op, unsigned bits, ir::Sign sign) {
    notes_.push_back(std::string(op) + (sign == ir::Sign::Unsigned ? " u" : " s") +
                     std::to_string(bits));
}

void Machine::flush_notes() {
    for (auto& n : notes_) {
        germ::Event ev;
        ev.kind = germ::Event::Kind::Overflow;
        ev.note = std::move(n);
        mem_ = mem_.push_event(std::move(ev));
    }
    notes_.clear();
}

bool Machine::bail(EvalOut& r) {
    if (!r.fault) return false;
    finish_fault(std::move(*r.fault));
    return true;
}

void Machine::fill_stats(ExecOutcome& o) {
    o.env = env_;
    o.gas_used = env_.gas_limit - env_.gas;
    o.steps = steps_;
}

void Machine::finish_normal() {
    ExecOutcome o;
    o.kind = ExecOutcome::Kind::Normal;
    o.memory = mem_;
    fill_stats(o);
    outcome_ = std::move(o);
}

void Machine::finish_thrown() {
    ExecOutcome o;
    o.kind = ExecOutcome::Kind::Thrown;
    o.memory = entry_;
    fill_stats(o);
    outcome_ = std::move(o);
}

void Machine::finish_stop(StopReason r) {
    ExecOutcome o;
    o.kind = ExecOutcome::Kind::OutOfGas;
    o.stop = r;
    o.memory = mem_;
    fill_stats(o);
    outcome_ = std::move(o);
}

void Machine::finish_fault(FaultInfo f) {
    if (f.line == 0) f.line = cur_line_;
    ExecOutcome o;
    o.kind = ExecOutcome::Kind::Fault;
    o.fault = std::move(f);
    o.memory = mem_;
    fill_stats(o);
    outcome_ = std::move(o);
}

// ---------------------------------------------------------------------------
// Driver helpers

std::optional<germ::Memory> with_special_member(const germ::Memory& m,
                                                ir::SpecialRef base,
                                                const std::string& member,
                                                germ::Value v,
                                                const germ::StdLib& lib) {
    ir::StructLayout layout;
    switch (base) {
        case ir::SpecialRef::Msg: layout = lib.msg_layout(); break;
        case ir::SpecialRef::This: layout = lib.address_layout(); break;
        case ir::SpecialRef::Block: layout = lib.block_layout(); break;
    }
    auto addr = MachineAddress::special(ir::special_ref_addr(base));
    MemoryCell cell = m.cell(addr);
    if (cell.v.kind() != Value::Kind::StructV) return std::nullopt;
    for (size_t i = 0; i < layout.size(); ++i) {
        if (layout[i].first != member) continue;
        if (i >= cell.v.members().size()) return std::nullopt;
        cell.v = cell.v.with_member(i, std::move(v));
        return m.write_cell(addr, cell);
    }
    return std::nullopt;
}

}  // namespace fspvm::fether
