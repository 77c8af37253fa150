#include "fspvm/ir.hpp"

#include <sstream>
#include <stdexcept>

namespace fspvm::ir {

namespace {

const char* kSpecialNames[kSpecialCount] = {
    "_0xinit", "_0xsend", "_0xsend_re", "_0xcall", "_0xmsg", "_0xaddress", "_0xblock",
};

std::string hex_bytes(const std::vector<uint8_t>& data) {
    static const char* digits = "0123456789abcdef";
    std::string out = "0x";
    for (uint8_t byte : data) {
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 0xf]);
    }
    return out;
}

}  // namespace

const char* special_name(SpecialAddr s) { return kSpecialNames[static_cast<int>(s)]; }

std::optional<SpecialAddr> special_by_name(const std::string& name) {
    for (int i = 0; i < kSpecialCount; ++i)
        if (name == kSpecialNames[i]) return static_cast<SpecialAddr>(i);
    return std::nullopt;
}

std::string LabelAddress::text() const {
    if (is_special) return special_name(special);
    char buf[16];
    std::snprintf(buf, sizeof buf, "_0x%08x", index);
    return buf;
}

// ---------------------------------------------------------------------------
// LType

bool valid_int_bits(unsigned bits) {
    return bits == 8 || bits == 16 || bits == 32 || bits == 64 || bits == 128 ||
           bits == 256;
}

LType LType::undef() {
    static const auto n = std::make_shared<const Node>(Node{Kind::Undef});
    return LType(n);
}

LType LType::integer(unsigned bits, Sign sign) {
    if (!valid_int_bits(bits)) throw std::invalid_argument("bad int width");
    Node n{Kind::Int};
    n.bits = bits;
    n.sign = sign;
    return LType(std::make_shared<const Node>(std::move(n)));
}

LType LType::floating() {
    static const auto n = std::make_shared<const Node>(Node{Kind::Float});
    return LType(n);
}

LType LType::boolean() {
    static const auto n = std::make_shared<const Node>(Node{Kind::Bool});
    return LType(n);
}

LType LType::string_ty() {
    static const auto n = std::make_shared<const Node>(Node{Kind::String});
    return LType(n);
}

LType LType::bytes(unsigned len) {
    if (len < 1 || len > 32) throw std::invalid_argument("bad bytes length");
    Node n{Kind::Bytes};
    n.blen = len;
    return LType(std::make_shared<const Node>(std::move(n)));
}

LType LType::address() {
    static const auto n = std::make_shared<const Node>(Node{Kind::Address});
    return LType(n);
}

LType LType::array(LType elem, std::optional<uint64_t> len) {
    Node n{Kind::Array};
    n.alen = len;
    n.subs.push_back(std::move(elem));
    return LType(std::make_shared<const Node>(std::move(n)));
}

LType LType::mapping(LType key, LType value) {
    if (!key.is_scalar_key()) throw std::invalid_argument("mapping key must be scalar");
    Node n{Kind::Mapping};
    n.subs.push_back(std::move(key));
    n.subs.push_back(std::move(value));
    return LType(std::make_shared<const Node>(std::move(n)));
}

LType LType::struct_ty(std::string name) {
    Node n{Kind::Struct};
    n.name = std::move(name);
    return LType(std::make_shared<const Node>(std::move(n)));
}

LType LType::fun(std::vector<LType> params, LType ret) {
    Node n{Kind::Fun};
    n.subs = std::move(params);
    n.subs.push_back(std::move(ret));
    return LType(std::make_shared<const Node>(std::move(n)));
}

LType LType::contract(std::string name) {
    Node n{Kind::Contract};
    n.name = std::move(name);
    return LType(std::make_shared<const Node>(std::move(n)));
}

bool LType::is_scalar_key() const {
    switch (kind()) {
        case Kind::Int:
        case Kind::Bool:
        case Kind::Bytes:
        case Kind::Address:
        case Kind::String:
            return true;
        default:
            return false;
    }
}

bool LType::operator==(const LType& o) const {
    if (n_ == o.n_) return true;
    if (kind() != o.kind()) return false;
    switch (kind()) {
        case Kind::Undef:
        case Kind::Float:
        case Kind::Bool:
        case Kind::String:
        case Kind::Address:
            return true;
        case Kind::Int:
            return bits() == o.bits() && sign() == o.sign();
        case Kind::Bytes:
            return byte_len() == o.byte_len();
        case Kind::Array:
            return array_len() == o.array_len() && elem() == o.elem();
        case Kind::Mapping:
            return key() == o.key() && value() == o.value();
        case Kind::Struct:
        case Kind::Contract:
            return name() == o.name();
        case Kind::Fun: {
            if (n_->subs.size() != o.n_->subs.size()) return false;
            for (size_t i = 0; i < n_->subs.size(); ++i)
                if (!(n_->subs[i] == o.n_->subs[i])) return false;
            return true;
        }
    }
    return false;
}

std::string LType::text() const {
    std::ostringstream out;
    switch (kind()) {
        case Kind::Undef: out << "undef"; break;
        case Kind::Float: out << "float"; break;
        case Kind::Bool: out << "bool"; break;
        case Kind::String: out << "string"; break;
        case Kind::Address: out << "address"; break;
        case Kind::Int:
            out << "(int " << bits() << ' ' << (sign() == Sign::Unsigned ? 'u' : 's')
                << ')';
            break;
        case Kind::Bytes: out << "(bytes " << byte_len() << ')'; break;
        case Kind::Array:
            out << "(array " << elem().text();
            if (array_len()) out << ' ' << *array_len();
            out << ')';
            break;
        case Kind::Mapping:
            out << "(mapping " << key().text() << ' ' << value().text() << ')';
            break;
        case Kind::Struct: out << "(struct " << name() << ')'; break;
        case Kind::Contract: out << "(contract " << name() << ')'; break;
        case Kind::Fun: {
            out << "(fn (";
            for (size_t i = 0; i + 1 < n_->subs.size(); ++i) {
                if (i) out << ' ';
                out << n_->subs[i].text();
            }
            out << ") " << ret().text() << ')';
            break;
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Literals

Int wrap_int(const Int& v, unsigned bits) {
    Int modulus = Int(1) << bits;
    Int r = v % modulus;
    if (r < 0) r += modulus;
    return r;
}

Int to_signed(const Int& mag, unsigned bits) {
    Int half = Int(1) << (bits - 1);
    if (mag >= half) return mag - (Int(1) << bits);
    return mag;
}

Literal Literal::undef() { return Literal{LType::undef()}; }

Literal Literal::boolean(bool v) {
    Literal l{LType::boolean()};
    l.b = v;
    return l;
}

Literal Literal::integer(unsigned bits, Sign s, Int v) {
    Literal l{LType::integer(bits, s)};
    l.i = wrap_int(v, bits);
    return l;
}

Literal Literal::floating(double v) {
    Literal l{LType::floating()};
    l.f = v;
    return l;
}

Literal Literal::string_lit(std::string s) {
    Literal l{LType::string_ty()};
    l.str = std::move(s);
    return l;
}

Literal Literal::bytes_lit(unsigned len, std::vector<uint8_t> data) {
    Literal l{LType::bytes(len)};
    data.resize(len, 0);
    l.bytes = std::move(data);
    return l;
}

Literal Literal::address_lit(std::vector<uint8_t> data20) {
    Literal l{LType::address()};
    data20.resize(20, 0);
    l.bytes = std::move(data20);
    return l;
}

bool Literal::operator==(const Literal& o) const {
    if (!(ty == o.ty)) return false;
    switch (ty.kind()) {
        case LType::Kind::Undef: return true;
        case LType::Kind::Bool: return b == o.b;
        case LType::Kind::Int: return i == o.i;
        case LType::Kind::Float: return f == o.f;
        case LType::Kind::String: return str == o.str;
        case LType::Kind::Bytes:
        case LType::Kind::Address: return bytes == o.bytes;
        default: return false;
    }
}

std::string Literal::text() const {
    std::ostringstream out;
    switch (ty.kind()) {
        case LType::Kind::Undef: out << "undef"; break;
        case LType::Kind::Bool: out << (b ? "true" : "false"); break;
        case LType::Kind::Int: out << i; break;
        case LType::Kind::Float: out << f; break;
        case LType::Kind::String: out << '"' << str << '"'; break;
        case LType::Kind::Bytes:
        case LType::Kind::Address: out << hex_bytes(bytes); break;
        default: out << "?"; break;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Expressions

const char* binop_text(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Mod: return "%";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::And: return "&&";
        case BinOp::Or: return "||";
    }
    return "?";
}

const char* special_ref_name(SpecialRef r) {
    switch (r) {
        case SpecialRef::Msg: return "msg";
        case SpecialRef::This: return "this";
        case SpecialRef::Block: return "block";
    }
    return "?";
}

SpecialAddr special_ref_addr(SpecialRef r) {
    switch (r) {
        case SpecialRef::Msg: return SpecialAddr::Msg;
        case SpecialRef::This: return SpecialAddr::Address;
        case SpecialRef::Block: return SpecialAddr::Block;
    }
    return SpecialAddr::Msg;
}

namespace {

bool is_comparison(BinOp op) {
    switch (op) {
        case BinOp::Eq: case BinOp::Ne: case BinOp::Lt:
        case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
            return true;
        default:
            return false;
    }
}

bool is_logical(BinOp op) { return op == BinOp::And || op == BinOp::Or; }

}  // namespace

ExprPtr Expr::constant(Literal v) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Const;
    e->in_ty = e->out_ty = v.ty;
    e->lit = std::move(v);
    return e;
}

ExprPtr Expr::var(std::string name, LType ty) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Var;
    e->name = std::move(name);
    e->in_ty = e->out_ty = std::move(ty);
    return e;
}

ExprPtr Expr::par(std::string name, LType ty) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Par;
    e->name = std::move(name);
    e->in_ty = e->out_ty = std::move(ty);
    return e;
}

ExprPtr Expr::fun(std::string name, LType ret) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Fun;
    e->name = std::move(name);
    e->in_ty = e->out_ty = std::move(ret);
    return e;
}

ExprPtr Expr::binop(BinOp op, ExprPtr l, ExprPtr r) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Binop;
    e->bop = op;
    e->in_ty = l->out_ty;
    e->out_ty = (is_comparison(op) || is_logical(op)) ? LType::boolean() : l->out_ty;
    e->a = std::move(l);
    e->b = std::move(r);
    return e;
}

ExprPtr Expr::unop(UnOp op, ExprPtr child) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Unop;
    e->uop = op;
    e->in_ty = child->out_ty;
    e->out_ty = op == UnOp::Not ? LType::boolean() : child->out_ty;
    e->a = std::move(child);
    return e;
}

ExprPtr Expr::cast(LType target, ExprPtr child) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Unop;
    e->uop = UnOp::Cast;
    e->in_ty = child->out_ty;
    e->out_ty = std::move(target);
    e->a = std::move(child);
    return e;
}

ExprPtr Expr::field(ExprPtr base, std::vector<std::string> path, LType ty) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Field;
    e->in_ty = base->out_ty;
    e->out_ty = std::move(ty);
    e->a = std::move(base);
    e->path = std::move(path);
    return e;
}

ExprPtr Expr::field_special(SpecialRef base, std::vector<std::string> path, LType ty) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Field;
    e->base_is_special = true;
    e->sref = base;
    e->in_ty = e->out_ty = std::move(ty);
    e->path = std::move(path);
    return e;
}

ExprPtr Expr::index(ExprPtr base, ExprPtr key) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Index;
    e->in_ty = base->out_ty;
    switch (base->out_ty.kind()) {
        case LType::Kind::Mapping: e->out_ty = base->out_ty.value(); break;
        case LType::Kind::Array: e->out_ty = base->out_ty.elem(); break;
        default: e->out_ty = LType::undef(); break;
    }
    e->a = std::move(base);
    e->b = std::move(key);
    return e;
}

ExprPtr Expr::struct_lit(LType struct_ty,
                         std::vector<std::pair<std::string, ExprPtr>> members) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::StructLit;
    e->in_ty = e->out_ty = std::move(struct_ty);
    e->members = std::move(members);
    return e;
}

bool equal(const Expr& x, const Expr& y) {
    if (x.kind != y.kind || !(x.in_ty == y.in_ty) || !(x.out_ty == y.out_ty))
        return false;
    switch (x.kind) {
        case Expr::Kind::Const: return x.lit == y.lit;
        case Expr::Kind::Var:
        case Expr::Kind::Par:
        case Expr::Kind::Fun: return x.name == y.name;
        case Expr::Kind::Binop:
            return x.bop == y.bop && equal(x.a, y.a) && equal(x.b, y.b);
        case Expr::Kind::Unop: return x.uop == y.uop && equal(x.a, y.a);
        case Expr::Kind::Field:
            if (x.base_is_special != y.base_is_special || x.path != y.path)
                return false;
            return x.base_is_special ? x.sref == y.sref : equal(x.a, y.a);
        case Expr::Kind::Index: return equal(x.a, y.a) && equal(x.b, y.b);
        case Expr::Kind::StructLit: {
            if (x.members.size() != y.members.size()) return false;
            for (size_t i = 0; i < x.members.size(); ++i) {
                if (x.members[i].first != y.members[i].first ||
                    !equal(x.members[i].second, y.members[i].second))
                    return false;
            }
            return true;
        }
    }
    return false;
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return equal(*a, *b);
}

// ---------------------------------------------------------------------------
// Statements

const char* visibility_text(Visibility v) {
    switch (v) {
        case Visibility::Public: return "public";
        case Visibility::Private: return "private";
        case Visibility::Internal: return "internal";
    }
    return "?";
}

namespace {
std::shared_ptr<Statement> mk(Statement::Kind k, int line) {
    auto s = std::make_shared<Statement>();
    s->kind = k;
    s->line = line;
    return s;
}
}  // namespace

StmtPtr Statement::nil() {
    static const StmtPtr n = mk(Kind::Nil, 0);
    return n;
}

StmtPtr Statement::seq(Program ss, int line) {
    auto s = mk(Kind::Seq, line);
    s->stmts = std::move(ss);
    return s;
}

StmtPtr Statement::var_decl(std::optional<Visibility> vis, ExprPtr decl, int line) {
    auto s = mk(Kind::Var, line);
    s->vis = vis;
    s->e1 = std::move(decl);
    return s;
}

StmtPtr Statement::struct_decl(std::string name,
                               std::vector<std::pair<LType, std::string>> members,
                               int line) {
    auto s = mk(Kind::StructDecl, line);
    s->name = std::move(name);
    s->members = std::move(members);
    return s;
}

StmtPtr Statement::assign(ExprPtr lhs, ExprPtr rhs, int line) {
    auto s = mk(Kind::Assign, line);
    s->e1 = std::move(lhs);
    s->e2 = std::move(rhs);
    return s;
}

StmtPtr Statement::if_(ExprPtr cond, StmtPtr then_s, StmtPtr else_s, int line) {
    auto s = mk(Kind::If, line);
    s->e1 = std::move(cond);
    s->s1 = std::move(then_s);
    s->s2 = std::move(else_s);
    return s;
}

StmtPtr Statement::while_(ExprPtr cond, StmtPtr body, int line) {
    auto s = mk(Kind::While, line);
    s->e1 = std::move(cond);
    s->s1 = std::move(body);
    return s;
}

StmtPtr Statement::for_(StmtPtr init, ExprPtr cond, StmtPtr step, StmtPtr body,
                        int line) {
    auto s = mk(Kind::For, line);
    s->s1 = std::move(init);
    s->e1 = std::move(cond);
    s->s2 = std::move(step);
    s->s3 = std::move(body);
    return s;
}

StmtPtr Statement::fun(std::optional<Visibility> vis, ExprPtr sig,
                       std::vector<ExprPtr> params, Program body, int line) {
    auto s = mk(Kind::Fun, line);
    s->vis = vis;
    s->e1 = std::move(sig);
    s->args = std::move(params);
    s->stmts = std::move(body);
    return s;
}

StmtPtr Statement::fun_call(ExprPtr callee, std::vector<ExprPtr> call_args, int line) {
    auto s = mk(Kind::FunCall, line);
    s->e1 = std::move(callee);
    s->args = std::move(call_args);
    return s;
}

StmtPtr Statement::ret(ExprPtr value_or_null, int line) {
    auto s = mk(Kind::Return, line);
    s->e1 = std::move(value_or_null);
    return s;
}

StmtPtr Statement::throw_(int line) { return mk(Kind::Throw, line); }

StmtPtr Statement::contract(ExprPtr name, std::vector<std::string> parents,
                            Program body, int line) {
    auto s = mk(Kind::Contract, line);
    s->e1 = std::move(name);
    s->parents = std::move(parents);
    s->stmts = std::move(body);
    return s;
}

bool equal(const Statement& x, const Statement& y) {
    if (x.kind != y.kind || x.vis != y.vis || x.name != y.name ||
        x.parents != y.parents)
        return false;
    if (!equal(x.e1, y.e1) || !equal(x.e2, y.e2)) return false;
    if (!equal(x.s1, y.s1) || !equal(x.s2, y.s2) || !equal(x.s3, y.s3)) return false;
    if (x.members.size() != y.members.size()) return false;
    for (size_t i = 0; i < x.members.size(); ++i) {
        if (!(x.members[i].first == y.members[i].first) ||
            x.members[i].second != y.members[i].second)
            return false;
    }
    if (x.args.size() != y.args.size()) return false;
    for (size_t i = 0; i < x.args.size(); ++i)
        if (!equal(x.args[i], y.args[i])) return false;
    return equal(x.stmts, y.stmts);
}

bool equal(const StmtPtr& a, const StmtPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return equal(*a, *b);
}

bool equal(const Program& a, const Program& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!equal(a[i], b[i])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// StructRegistry

const StructLayout* StructRegistry::find(const std::string& name) const {
    auto it = layouts.find(name);
    return it == layouts.end() ? nullptr : &it->second;
}

const LType* StructRegistry::member(const std::string& layout,
                                    const std::string& field) const {
    const StructLayout* l = find(layout);
    if (!l) return nullptr;
    for (const auto& [n, t] : *l)
        if (n == field) return &t;
    return nullptr;
}

std::optional<size_t> StructRegistry::member_index(const std::string& layout,
                                                   const std::string& field) const {
    const StructLayout* l = find(layout);
    if (!l) return std::nullopt;
    for (size_t i = 0; i < l->size(); ++i)
        if ((*l)[i].first == field) return i;
    return std::nullopt;
}

const char* type_error_text(TypeErrorCode c) {
    switch (c) {
        case TypeErrorCode::UnboundIdentifier: return "UnboundIdentifier";
        case TypeErrorCode::TypeMismatch: return "TypeMismatch";
        case TypeErrorCode::ConditionNotBool: return "ConditionNotBool";
        case TypeErrorCode::AssignTypeMismatch: return "AssignTypeMismatch";
        case TypeErrorCode::ArityMismatch: return "ArityMismatch";
    }
    return "?";
}

}  // namespace fspvm::ir
