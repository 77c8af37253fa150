// Elaboration from the surface syntax to fully annotated IR. Declarations are
// collected first (addresses, struct layouts, function signatures), then
// bodies are translated with bidirectional literal typing: numeric literals
// take the width demanded by their context, and remaining integer mismatches
// materialize as explicit width casts.
#include <cstdlib>

#include "frontend_ast.hpp"

namespace fspvm::frontend {

namespace {

struct Fail {
    FrontendError::Kind kind;
    int line;
    std::string msg;
};

[[noreturn]] void fail(int line, std::string msg) {
    throw Fail{FrontendError::Kind::Translate, line, std::move(msg)};
}
[[noreturn]] void unsupported(int line, std::string what) {
    throw Fail{FrontendError::Kind::Unsupported, line, std::move(what)};
}

// Surface-level literal (possibly negated), eligible for context adaptation.
bool is_plain_literal(const ast::ExprP& e) {
    if (!e) return false;
    if (e->kind == ast::Expr::K::Number || e->kind == ast::Expr::K::Bool ||
        e->kind == ast::Expr::K::StringLit)
        return true;
    return e->kind == ast::Expr::K::Unary && e->op == "-" &&
           is_plain_literal(e->a);
}

bool contains_send(const ast::ExprP& e) {
    if (!e) return false;
    if (e->kind == ast::Expr::K::Call && e->a &&
        e->a->kind == ast::Expr::K::Member &&
        (e->a->member == "send" || e->a->member == "transfer" ||
         e->a->member == "call"))
        return true;
    if (contains_send(e->a) || contains_send(e->b)) return true;
    for (const auto& a : e->args)
        if (contains_send(a)) return true;
    return false;
}

class Translator {
  public:
    Translator(const ast::SourceUnit& unit, std::string file, unsigned bits)
        : unit_(unit), bits_(bits), lib_{bits} {
        image_.file = std::move(file);
        image_.uint_bits = bits;
    }

    ProgramImage run() {
        if (unit_.contracts.size() != 1)
            unsupported(unit_.contracts.size() > 1 ? unit_.contracts[1].line : 1,
                        "exactly one contract per file");
        const ast::ContractDecl& c = unit_.contracts[0];
        contract_ = &c;
        image_.contract_name = c.name;
        lib_.install_types(ctx_);

        collect(c);
        ir::Program body = translate_contract(c);

        ctx_.vars[c.name] = ir::LType::contract(c.name);
        ir::ExprPtr name_expr = ir::Expr::var(c.name, ir::LType::contract(c.name));
        image_.program = {ir::Statement::contract(name_expr, c.parents,
                                                  std::move(body), c.line)};
        image_.ctx = ctx_;
        image_.table = table_;
        return std::move(image_);
    }

  private:
    // ---- declaration collection

    void collect(const ast::ContractDecl& c) {
        for (const auto& [item, idx] : c.order) {
            switch (item) {
                case ast::ContractDecl::Item::State: {
                    const ast::StateVar& v = c.state[idx];
                    if (v.init) unsupported(v.line, "state variable initializer");
                    ir::LType ty = resolve(v.ty);
                    if (ctx_.vars.count(v.name))
                        fail(v.line, "duplicate declaration of " + v.name);
                    ctx_.vars[v.name] = ty;
                    table_.intern(v.name);
                    image_.state_vars.push_back(v.name);
                    break;
                }
                case ast::ContractDecl::Item::Struct: {
                    const ast::StructDecl& s = c.structs[idx];
                    ir::StructLayout layout;
                    for (const auto& m : s.members)
                        layout.emplace_back(m.name, resolve(m.ty));
                    if (ctx_.structs.find(s.name))
                        fail(s.line, "duplicate struct " + s.name);
                    ctx_.structs.layouts[s.name] = std::move(layout);
                    table_.intern(s.name);
                    break;
                }
                case ast::ContractDecl::Item::Function:
                    break;  // functions are numbered after the contract cell
            }
        }
        table_.intern(c.name);
        for (const auto& f : c.functions) {
            if (ctx_.funs.count(f.name)) fail(f.line, "duplicate function " + f.name);
            table_.intern(f.name + "()");
            std::vector<ir::LType> params;
            for (const auto& p : f.params) {
                params.push_back(resolve(p.ty));
                intern_local(f.name, p.name, p.line);
            }
            ir::LType ret = f.ret ? resolve(f.ret) : ir::LType::undef();
            ctx_.funs[f.name] = ir::LType::fun(std::move(params), ret);
            for (const auto& s : f.body) intern_body_locals(f.name, s);
        }
    }

    void intern_local(const std::string& fun, const std::string& name, int line) {
        std::string key = fun + "." + name;
        if (table_.find(key)) fail(line, "duplicate declaration of " + name);
        table_.intern(key);
    }

    void intern_body_locals(const std::string& fun, const ast::StmtP& s) {
        if (!s) return;
        switch (s->kind) {
            case ast::Stmt::K::VarDecl: intern_local(fun, s->name, s->line); break;
            case ast::Stmt::K::Block:
                for (const auto& c : s->body) intern_body_locals(fun, c);
                break;
            case ast::Stmt::K::If:
            case ast::Stmt::K::For:
                intern_body_locals(fun, s->s1);
                intern_body_locals(fun, s->s2);
                intern_body_locals(fun, s->s3);
                break;
            case ast::Stmt::K::While:
                intern_body_locals(fun, s->s1);
                break;
            default:
                break;
        }
    }

    // ---- types

    ir::LType resolve(const ast::TypeRefP& t) {
        if (!t) fail(0, "missing type");
        switch (t->kind) {
            case ast::TypeRef::K::Mapping: {
                ir::LType key = resolve(t->key);
                if (!key.is_scalar_key())
                    fail(t->line, "mapping key must be a scalar type");
                return ir::LType::mapping(key, resolve(t->val));
            }
            case ast::TypeRef::K::Array:
                return ir::LType::array(resolve(t->elem), t->len);
            case ast::TypeRef::K::Named:
                return resolve_named(t->name, t->line);
        }
        fail(t->line, "bad type");
    }

    ir::LType resolve_named(const std::string& name, int line) {
        if (name == "bool") return ir::LType::boolean();
        if (name == "address") return ir::LType::address();
        if (name == "string") return ir::LType::string_ty();
        if (name == "byte") return ir::LType::bytes(1);
        if (name == "uint") return ir::LType::integer(bits_, ir::Sign::Unsigned);
        if (name == "int") return ir::LType::integer(bits_, ir::Sign::Signed);
        auto width_of = [&](size_t prefix_len) -> unsigned {
            unsigned w = static_cast<unsigned>(
                std::strtoul(name.c_str() + prefix_len, nullptr, 10));
            return w;
        };
        if (name.rfind("uint", 0) == 0 && name.size() > 4) {
            unsigned w = width_of(4);
            if (!ir::valid_int_bits(w)) fail(line, "unsupported width " + name);
            return ir::LType::integer(w, ir::Sign::Unsigned);
        }
        if (name.rfind("int", 0) == 0 && name.size() > 3) {
            unsigned w = width_of(3);
            if (!ir::valid_int_bits(w)) fail(line, "unsupported width " + name);
            return ir::LType::integer(w, ir::Sign::Signed);
        }
        if (name.rfind("bytes", 0) == 0) {
            if (name.size() == 5) unsupported(line, "dynamic bytes");
            unsigned w = width_of(5);
            if (w < 1 || w > 32) fail(line, "unsupported width " + name);
            return ir::LType::bytes(w);
        }
        if (ctx_.structs.find(name)) return ir::LType::struct_ty(name);
        fail(line, "unknown type " + name);
    }

    // ---- scope

    struct Binding {
        std::string qualified;
        ir::LType ty;
        bool is_param;
    };

    ir::ExprPtr ident_expr(const std::string& name, int line) {
        auto it = locals_.find(name);
        if (it != locals_.end()) {
            const Binding& b = it->second;
            return b.is_param ? ir::Expr::par(b.qualified, b.ty)
                              : ir::Expr::var(b.qualified, b.ty);
        }
        auto sv = ctx_.vars.find(name);
        if (sv != ctx_.vars.end()) return ir::Expr::var(name, sv->second);
        fail(line, "unknown identifier " + name);
    }

    // ---- literals

    ir::Int parse_number(const std::string& text) { return ir::Int(text); }

    ir::ExprPtr number_literal(const ast::Expr& e, const std::optional<ir::LType>& hint,
                               bool negate) {
        ir::Int v = parse_number(e.text);
        if (negate) v = -v;
        if (hint) {
            switch (hint->kind()) {
                case ir::LType::Kind::Int:
                    return ir::Expr::constant(
                        ir::Literal::integer(hint->bits(), hint->sign(), v));
                case ir::LType::Kind::Address: {
                    if (negate) fail(e.line, "negative address literal");
                    std::vector<uint8_t> bytes = int_bytes(v, 20);
                    return ir::Expr::constant(ir::Literal::address_lit(std::move(bytes)));
                }
                case ir::LType::Kind::Bytes: {
                    if (negate) fail(e.line, "negative bytes literal");
                    std::vector<uint8_t> bytes = int_bytes(v, hint->byte_len());
                    return ir::Expr::constant(
                        ir::Literal::bytes_lit(hint->byte_len(), std::move(bytes)));
                }
                default:
                    break;
            }
        }
        ir::Sign sign = negate ? ir::Sign::Signed : ir::Sign::Unsigned;
        return ir::Expr::constant(ir::Literal::integer(bits_, sign, v));
    }

    static std::vector<uint8_t> int_bytes(const ir::Int& v, unsigned len) {
        std::vector<uint8_t> out(len, 0);
        ir::Int cur = v;
        for (unsigned i = 0; i < len && cur != 0; ++i) {
            out[len - 1 - i] = static_cast<uint8_t>(cur & 0xff);
            cur >>= 8;
        }
        return out;
    }

    // ---- expressions

    ir::ExprPtr adapt(ir::ExprPtr e, const ir::LType& want, int line) {
        if (e->out_ty == want) return e;
        if (e->out_ty.is_int() && want.is_int()) return ir::Expr::cast(want, e);
        fail(line, "no conversion from " + e->out_ty.text() + " to " + want.text());
    }

    ir::ExprPtr expr(const ast::ExprP& e, const std::optional<ir::LType>& hint) {
        switch (e->kind) {
            case ast::Expr::K::Number:
                return number_literal(*e, hint, false);
            case ast::Expr::K::Bool:
                return ir::Expr::constant(ir::Literal::boolean(e->bval));
            case ast::Expr::K::StringLit: {
                if (hint && hint->kind() == ir::LType::Kind::Bytes) {
                    std::vector<uint8_t> data(e->text.begin(), e->text.end());
                    if (data.size() > hint->byte_len())
                        fail(e->line, "literal longer than its bytes type");
                    return ir::Expr::constant(
                        ir::Literal::bytes_lit(hint->byte_len(), std::move(data)));
                }
                return ir::Expr::constant(ir::Literal::string_lit(e->text));
            }
            case ast::Expr::K::Ident:
                if (e->text == "msg" || e->text == "this" || e->text == "block")
                    fail(e->line, e->text + " cannot stand alone");
                return ident_expr(e->text, e->line);
            case ast::Expr::K::Unary: {
                if (e->op == "-") {
                    if (is_plain_literal(e->a) &&
                        e->a->kind == ast::Expr::K::Number)
                        return number_literal(*e->a, hint, true);
                    ir::ExprPtr a = expr(e->a, hint);
                    if (!a->out_ty.is_int() || a->out_ty.sign() != ir::Sign::Signed)
                        fail(e->line, "arithmetic negation needs a signed operand");
                    return ir::Expr::unop(ir::UnOp::Neg, a);
                }
                if (e->op == "!") {
                    ir::ExprPtr a = expr(e->a, ir::LType::boolean());
                    if (!a->out_ty.is_bool())
                        fail(e->line, "logical negation needs a boolean operand");
                    return ir::Expr::unop(ir::UnOp::Not, a);
                }
                fail(e->line, "unknown operator " + e->op);
            }
            case ast::Expr::K::Binary:
                return binary(*e, hint);
            case ast::Expr::K::Member:
                return member(*e);
            case ast::Expr::K::Index: {
                ir::ExprPtr base = expr(e->a, std::nullopt);
                std::optional<ir::LType> key_hint;
                ir::LType key_ty;
                if (base->out_ty.kind() == ir::LType::Kind::Mapping)
                    key_ty = base->out_ty.key();
                else if (base->out_ty.kind() == ir::LType::Kind::Array)
                    key_ty = ir::LType::integer(bits_, ir::Sign::Unsigned);
                else
                    fail(e->line, "indexing a non-indexable value");
                ir::ExprPtr key = adapt(expr(e->b, key_ty), key_ty, e->line);
                return ir::Expr::index(base, key);
            }
            case ast::Expr::K::Call: {
                if (e->a && e->a->kind == ast::Expr::K::Ident &&
                    ctx_.structs.find(e->a->text))
                    return struct_literal(*e);
                if (contains_send(e))
                    unsupported(e->line, "transfer result used inside an expression");
                unsupported(e->line, "call used as a value");
            }
        }
        fail(e->line, "bad expression");
    }

    ir::ExprPtr binary(const ast::Expr& e, const std::optional<ir::LType>& hint) {
        const std::string& op = e.op;
        auto bop = [&]() -> ir::BinOp {
            if (op == "+") return ir::BinOp::Add;
            if (op == "-") return ir::BinOp::Sub;
            if (op == "*") return ir::BinOp::Mul;
            if (op == "/") return ir::BinOp::Div;
            if (op == "%") return ir::BinOp::Mod;
            if (op == "==") return ir::BinOp::Eq;
            if (op == "!=") return ir::BinOp::Ne;
            if (op == "<") return ir::BinOp::Lt;
            if (op == "<=") return ir::BinOp::Le;
            if (op == ">") return ir::BinOp::Gt;
            if (op == ">=") return ir::BinOp::Ge;
            if (op == "&&") return ir::BinOp::And;
            if (op == "||") return ir::BinOp::Or;
            fail(e.line, "unknown operator " + op);
        }();

        bool logical = op == "&&" || op == "||";
        bool arith = op == "+" || op == "-" || op == "*" || op == "/" || op == "%";
        if (logical) {
            ir::ExprPtr l = expr(e.a, ir::LType::boolean());
            ir::ExprPtr r = expr(e.b, ir::LType::boolean());
            if (!l->out_ty.is_bool() || !r->out_ty.is_bool())
                fail(e.line, "logical connective needs boolean operands");
            return ir::Expr::binop(bop, l, r);
        }

        // Literal operands adopt the other side's type; two differently sized
        // integer expressions harmonize by casting the right operand.
        std::optional<ir::LType> lhint = arith ? hint : std::nullopt;
        ir::ExprPtr l, r;
        if (is_plain_literal(e.a) && !is_plain_literal(e.b)) {
            r = expr(e.b, lhint);
            l = expr(e.a, r->out_ty);
        } else {
            l = expr(e.a, lhint);
            r = expr(e.b, l->out_ty);
        }
        if (l->out_ty != r->out_ty && l->out_ty.is_int() && r->out_ty.is_int())
            r = ir::Expr::cast(l->out_ty, r);
        if (l->out_ty != r->out_ty)
            fail(e.line, "operand types disagree: " + l->out_ty.text() + " vs " +
                             r->out_ty.text());
        if (arith && !l->out_ty.is_int())
            fail(e.line, "arithmetic needs integer operands");
        return ir::Expr::binop(bop, l, r);
    }

    ir::ExprPtr member(const ast::Expr& e) {
        if (e.a && e.a->kind == ast::Expr::K::Ident) {
            const std::string& base = e.a->text;
            if (base == "msg") {
                if (e.member == "sender")
                    return ir::Expr::field_special(ir::SpecialRef::Msg, {"sender"},
                                                   ir::LType::address());
                if (e.member == "value")
                    return ir::Expr::field_special(ir::SpecialRef::Msg, {"values"},
                                                   lib_.uint_ty());
                fail(e.line, "msg has no member " + e.member);
            }
            if (base == "this") {
                if (e.member == "balance")
                    return ir::Expr::field_special(ir::SpecialRef::This, {"balance"},
                                                   lib_.uint_ty());
                fail(e.line, "this has no member " + e.member);
            }
            if (base == "block") {
                if (e.member == "number" || e.member == "timestamp")
                    return ir::Expr::field_special(ir::SpecialRef::Block, {e.member},
                                                   lib_.uint_ty());
                fail(e.line, "block has no member " + e.member);
            }
        }
        ir::ExprPtr base = expr(e.a, std::nullopt);
        if (base->out_ty.kind() != ir::LType::Kind::Struct)
            fail(e.line, "member access on a non-struct value");
        const ir::StructLayout* layout = ctx_.structs.find(base->out_ty.name());
        if (!layout) fail(e.line, "unknown struct " + base->out_ty.name());
        for (const auto& [name, ty] : *layout)
            if (name == e.member) return ir::Expr::field(base, {e.member}, ty);
        fail(e.line, base->out_ty.name() + " has no member " + e.member);
    }

    ir::ExprPtr struct_literal(const ast::Expr& e) {
        const std::string& name = e.a->text;
        const ir::StructLayout& layout = *ctx_.structs.find(name);
        if (e.args.size() != layout.size())
            fail(e.line, name + " wants " + std::to_string(layout.size()) +
                             " members, got " + std::to_string(e.args.size()));
        std::vector<std::pair<std::string, ir::ExprPtr>> members;
        for (size_t i = 0; i < layout.size(); ++i) {
            ir::ExprPtr m = adapt(expr(e.args[i], layout[i].second), layout[i].second,
                                  e.line);
            members.emplace_back(layout[i].first, m);
        }
        return ir::Expr::struct_lit(ir::LType::struct_ty(name), std::move(members));
    }

    // ---- send family

    struct SendParts {
        ir::ExprPtr target;
        ir::ExprPtr amount;
        const char* builtin;
    };

    // Matches `<address expr>.send(<amount>)` and its transfer/call variants.
    std::optional<SendParts> send_parts(const ast::ExprP& e) {
        if (!e || e->kind != ast::Expr::K::Call) return std::nullopt;
        if (!e->a || e->a->kind != ast::Expr::K::Member) return std::nullopt;
        const std::string& m = e->a->member;
        const char* builtin = nullptr;
        if (m == "send") builtin = germ::kSendBuiltin;
        else if (m == "transfer") builtin = germ::kTransferBuiltin;
        else if (m == "call") builtin = germ::kCallBuiltin;
        if (!builtin) return std::nullopt;
        if (e->args.size() != 1) fail(e->line, m + " takes one amount");
        ir::ExprPtr target = expr(e->a->a, std::nullopt);
        if (target->out_ty.kind() != ir::LType::Kind::Address)
            fail(e->line, m + " needs an address target");
        ir::ExprPtr amount = adapt(expr(e->args[0], lib_.uint_ty()), lib_.uint_ty(),
                                   e->line);
        return SendParts{target, amount, builtin};
    }

    ir::StmtPtr send_call_stmt(const SendParts& p, int line) {
        ir::ExprPtr callee = ir::Expr::fun(p.builtin, ir::LType::boolean());
        return ir::Statement::fun_call(callee, {p.target, p.amount}, line);
    }

    ir::ExprPtr send_result_expr() {
        return ir::Expr::var(germ::kSendResultVar, ir::LType::boolean());
    }

    // ---- statements

    ir::StmtPtr stmt(const ast::StmtP& s) {
        switch (s->kind) {
            case ast::Stmt::K::Block: {
                ir::Program body;
                for (const auto& c : s->body) body.push_back(stmt(c));
                return ir::Statement::seq(std::move(body), s->line);
            }
            case ast::Stmt::K::VarDecl: {
                ir::LType ty = resolve(s->decl_ty);
                std::string qualified = cur_fun_ + "." + s->name;
                locals_[s->name] = Binding{qualified, ty, false};
                ir::ExprPtr decl = ir::Expr::var(qualified, ty);
                ctx_.vars[qualified] = ty;
                ir::StmtPtr var_stmt =
                    ir::Statement::var_decl(std::nullopt, decl, s->line);
                if (!s->init) return var_stmt;
                ir::ExprPtr init = adapt(expr(s->init, ty), ty, s->line);
                return ir::Statement::seq(
                    {var_stmt, ir::Statement::assign(decl, init, s->line)}, s->line);
            }
            case ast::Stmt::K::Assign: {
                ir::ExprPtr lhs = expr(s->target, std::nullopt);
                ir::ExprPtr rhs = adapt(expr(s->value, lhs->out_ty), lhs->out_ty,
                                        s->line);
                return ir::Statement::assign(lhs, rhs, s->line);
            }
            case ast::Stmt::K::OpAssign: {
                ir::ExprPtr lhs = expr(s->target, std::nullopt);
                ir::BinOp op;
                if (s->op == "+=") op = ir::BinOp::Add;
                else if (s->op == "-=") op = ir::BinOp::Sub;
                else if (s->op == "*=") op = ir::BinOp::Mul;
                else if (s->op == "/=") op = ir::BinOp::Div;
                else op = ir::BinOp::Mod;
                ir::ExprPtr rhs = adapt(expr(s->value, lhs->out_ty), lhs->out_ty,
                                        s->line);
                return ir::Statement::assign(lhs, ir::Expr::binop(op, lhs, rhs),
                                             s->line);
            }
            case ast::Stmt::K::IncDec: {
                ir::ExprPtr lhs = expr(s->target, std::nullopt);
                if (!lhs->out_ty.is_int())
                    fail(s->line, s->op + " needs an integer target");
                ir::ExprPtr one = ir::Expr::constant(
                    ir::Literal::integer(lhs->out_ty.bits(), lhs->out_ty.sign(), 1));
                ir::BinOp op = s->op == "++" ? ir::BinOp::Add : ir::BinOp::Sub;
                return ir::Statement::assign(lhs, ir::Expr::binop(op, lhs, one),
                                             s->line);
            }
            case ast::Stmt::K::If: {
                if (auto parts = send_parts(s->cond)) {
                    ir::StmtPtr then_s = s->s1 ? stmt(s->s1) : ir::Statement::nil();
                    ir::StmtPtr else_s = s->s2 ? stmt(s->s2) : ir::Statement::nil();
                    return ir::Statement::seq(
                        {send_call_stmt(*parts, s->line),
                         ir::Statement::if_(send_result_expr(), then_s, else_s,
                                            s->line)},
                        s->line);
                }
                if (contains_send(s->cond))
                    unsupported(s->line,
                                "transfer result used inside a compound condition");
                ir::ExprPtr cond = expr(s->cond, ir::LType::boolean());
                ir::StmtPtr then_s = s->s1 ? stmt(s->s1) : ir::Statement::nil();
                ir::StmtPtr else_s = s->s2 ? stmt(s->s2) : ir::Statement::nil();
                return ir::Statement::if_(cond, then_s, else_s, s->line);
            }
            case ast::Stmt::K::While: {
                if (contains_send(s->cond))
                    unsupported(s->line, "transfer inside a loop condition");
                ir::ExprPtr cond = expr(s->cond, ir::LType::boolean());
                return ir::Statement::while_(cond, stmt(s->s1), s->line);
            }
            case ast::Stmt::K::For: {
                if (contains_send(s->cond))
                    unsupported(s->line, "transfer inside a loop condition");
                ir::StmtPtr init = s->s1 ? stmt(s->s1) : ir::Statement::nil();
                ir::ExprPtr cond = s->cond
                                       ? expr(s->cond, ir::LType::boolean())
                                       : ir::Expr::constant(ir::Literal::boolean(true));
                ir::StmtPtr step = s->s2 ? stmt(s->s2) : ir::Statement::nil();
                return ir::Statement::for_(init, cond, step, stmt(s->s3), s->line);
            }
            case ast::Stmt::K::Return: {
                if (!s->expr) return ir::Statement::ret(nullptr, s->line);
                const ir::LType& ret = ctx_.funs.at(cur_fun_).ret();
                if (ret.kind() == ir::LType::Kind::Undef)
                    fail(s->line, cur_fun_ + " returns nothing");
                return ir::Statement::ret(adapt(expr(s->expr, ret), ret, s->line),
                                          s->line);
            }
            case ast::Stmt::K::Throw:
                return ir::Statement::throw_(s->line);
            case ast::Stmt::K::ExprStmt:
                return call_stmt(s->expr, s->line);
        }
        fail(s->line, "bad statement");
    }

    ir::StmtPtr call_stmt(const ast::ExprP& e, int line) {
        if (auto parts = send_parts(e)) return send_call_stmt(*parts, line);
        if (!e || e->kind != ast::Expr::K::Call)
            fail(line, "statement has no effect");
        if (e->a && e->a->kind == ast::Expr::K::Ident) {
            const std::string& name = e->a->text;
            if (name == "require") {
                if (e->args.size() != 1) fail(line, "require takes one condition");
                ir::ExprPtr cond = expr(e->args[0], ir::LType::boolean());
                return ir::Statement::if_(ir::Expr::unop(ir::UnOp::Not, cond),
                                          ir::Statement::throw_(line),
                                          ir::Statement::nil(), line);
            }
            auto fit = ctx_.funs.find(name);
            if (fit != ctx_.funs.end()) {
                const ir::LType& sig = fit->second;
                if (e->args.size() != sig.param_count())
                    fail(line, name + " takes " + std::to_string(sig.param_count()) +
                                   " arguments");
                std::vector<ir::ExprPtr> args;
                for (size_t i = 0; i < e->args.size(); ++i)
                    args.push_back(
                        adapt(expr(e->args[i], sig.params()[i]), sig.params()[i], line));
                return ir::Statement::fun_call(ir::Expr::fun(name, sig.ret()),
                                               std::move(args), line);
            }
            fail(line, "unknown function " + name);
        }
        unsupported(line, "call through a computed target");
    }

    // ---- functions and the contract wrapper

    ir::StmtPtr translate_function(const ast::FunDecl& f) {
        cur_fun_ = f.name;
        locals_.clear();
        std::vector<ir::ExprPtr> params;
        const ir::LType& sig = ctx_.funs.at(f.name);
        for (size_t i = 0; i < f.params.size(); ++i) {
            std::string qualified = f.name + "." + f.params[i].name;
            ir::LType ty = sig.params()[i];
            locals_[f.params[i].name] = Binding{qualified, ty, true};
            ctx_.vars[qualified] = ty;
            params.push_back(ir::Expr::par(qualified, ty));
        }
        ir::Program body;
        for (const auto& s : f.body) body.push_back(stmt(s));

        FunctionDef def;
        def.name = f.name;
        def.is_constructor = f.name == contract_->name;
        def.vis = f.vis;
        def.params = params;
        def.body = body;
        def.ret = sig.ret();
        image_.functions[f.name] = def;

        ir::ExprPtr sig_expr = ir::Expr::fun(f.name, sig.ret());
        return ir::Statement::fun(f.vis, sig_expr, std::move(params), std::move(body),
                                  f.line);
    }

    ir::Program translate_contract(const ast::ContractDecl& c) {
        ir::Program body;
        for (const auto& [item, idx] : c.order) {
            switch (item) {
                case ast::ContractDecl::Item::State: {
                    const ast::StateVar& v = c.state[idx];
                    ir::ExprPtr decl = ir::Expr::var(v.name, ctx_.vars.at(v.name));
                    // Unmodified state variables are internal; the explicit
                    // marker separates state cells from function locals.
                    body.push_back(ir::Statement::var_decl(
                        v.vis.value_or(ir::Visibility::Internal), decl, v.line));
                    break;
                }
                case ast::ContractDecl::Item::Struct: {
                    const ast::StructDecl& s = c.structs[idx];
                    std::vector<std::pair<ir::LType, std::string>> members;
                    for (const auto& [name, ty] : ctx_.structs.layouts.at(s.name))
                        members.emplace_back(ty, name);
                    body.push_back(
                        ir::Statement::struct_decl(s.name, std::move(members), s.line));
                    break;
                }
                case ast::ContractDecl::Item::Function:
                    body.push_back(translate_function(c.functions[idx]));
                    break;
            }
        }
        return body;
    }

    const ast::SourceUnit& unit_;
    unsigned bits_;
    germ::StdLib lib_;
    const ast::ContractDecl* contract_ = nullptr;

    ProgramImage image_;
    AddressTable table_;
    ir::TypeContext ctx_;
    std::map<std::string, Binding> locals_;
    std::string cur_fun_;
};

}  // namespace

// ---------------------------------------------------------------------------
// AddressTable

ir::LabelAddress AddressTable::intern(const std::string& key) {
    auto it = by_key_.find(key);
    if (it != by_key_.end()) return ir::LabelAddress::numbered(it->second);
    uint32_t idx = next_++;
    by_key_[key] = idx;
    entries_.emplace_back(key, ir::LabelAddress::numbered(idx));
    return ir::LabelAddress::numbered(idx);
}

std::optional<ir::LabelAddress> AddressTable::find(const std::string& key) const {
    auto it = by_key_.find(key);
    if (it == by_key_.end()) return std::nullopt;
    return ir::LabelAddress::numbered(it->second);
}

std::string AddressTable::serialize() const {
    std::string out;
    char buf[16];
    for (const auto& [key, addr] : entries_) {
        std::snprintf(buf, sizeof buf, "0x%08x", addr.index);
        out += key;
        out += ' ';
        out += buf;
        out += '\n';
    }
    return out;
}

std::optional<AddressTable> AddressTable::parse(const std::string& text) {
    AddressTable out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        size_t sp = line.rfind(' ');
        if (sp == std::string::npos) return std::nullopt;
        std::string key = line.substr(0, sp);
        char* end = nullptr;
        unsigned long idx = std::strtoul(line.c_str() + sp + 1, &end, 16);
        if (!end || *end) return std::nullopt;
        if (out.by_key_.count(key)) return std::nullopt;
        out.by_key_[key] = static_cast<uint32_t>(idx);
        out.entries_.emplace_back(key,
                                  ir::LabelAddress::numbered(static_cast<uint32_t>(idx)));
        if (idx >= out.next_) out.next_ = static_cast<uint32_t>(idx) + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------

TranslateResult translate_source(const std::string& src, const std::string& file,
                                 unsigned uint_bits) {
    LexResult lexed = lex(src);
    if (lexed.error) return {std::nullopt, lexed.error};
    ast::ParseResult parsed = ast::parse(lexed.tokens);
    if (parsed.error) return {std::nullopt, parsed.error};
    try {
        Translator t(*parsed.unit, file, uint_bits);
        return {t.run(), std::nullopt};
    } catch (const Fail& f) {
        return {std::nullopt, FrontendError{f.kind, f.line, f.msg}};
    }
}

}  // namespace fspvm::frontend
