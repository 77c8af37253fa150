// Reader for the canonical IR text form. The text is a stream of s-expression
// forms; node annotations are not stored in the text, they are re-synthesized
// by the IR factories, so reading pretty-printed output reproduces the
// original program up to line numbers.
#include <cstdlib>

#include "fspvm/frontend.hpp"

namespace fspvm::frontend {

namespace {

struct Fail {
    int line;
    std::string msg;
};

[[noreturn]] void fail(int line, std::string msg) { throw Fail{line, std::move(msg)}; }

struct Sx {
    bool is_atom = false;
    std::string atom;   // also carries decoded string literals, marked below
    bool is_string = false;
    std::vector<Sx> kids;
    int line = 0;
};

class SxScanner {
  public:
    explicit SxScanner(const std::string& text) : s_(text) {}

    std::vector<Sx> top_level() {
        std::vector<Sx> out;
        skip_space();
        while (pos_ < s_.size()) {
            out.push_back(form());
            skip_space();
        }
        return out;
    }

  private:
    Sx form() {
        skip_space();
        if (pos_ >= s_.size()) fail(line_, "unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            Sx list;
            list.line = line_;
            ++pos_;
            skip_space();
            while (pos_ < s_.size() && s_[pos_] != ')') {
                list.kids.push_back(form());
                skip_space();
            }
            if (pos_ >= s_.size()) fail(list.line, "unterminated form");
            ++pos_;
            return list;
        }
        if (c == ')') fail(line_, "unmatched ')'");
        if (c == '"') return string_atom();
        Sx a;
        a.is_atom = true;
        a.line = line_;
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
               s_[pos_] != '(' && s_[pos_] != ')')
            a.atom.push_back(s_[pos_++]);
        return a;
    }

    Sx string_atom() {
        Sx a;
        a.is_atom = true;
        a.is_string = true;
        a.line = line_;
        ++pos_;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            char c = s_[pos_++];
            if (c == '\\' && pos_ < s_.size()) {
                char e = s_[pos_++];
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    default: c = e;
                }
            }
            a.atom.push_back(c);
        }
        if (pos_ >= s_.size()) fail(a.line, "unterminated string");
        ++pos_;
        return a;
    }

    void skip_space() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            if (s_[pos_] == '\n') ++line_;
            ++pos_;
        }
    }

    const std::string& s_;
    size_t pos_ = 0;
    int line_ = 1;
};

const Sx& kid(const Sx& x, size_t i) {
    if (i >= x.kids.size()) fail(x.line, "form is too short");
    return x.kids[i];
}

const std::string& atom(const Sx& x) {
    if (!x.is_atom) fail(x.line, "expected an atom");
    return x.atom;
}

const std::string& head(const Sx& x) { return atom(kid(x, 0)); }

uint64_t number_of(const Sx& x) {
    const std::string& t = atom(x);
    char* end = nullptr;
    uint64_t v = std::strtoull(t.c_str(), &end, 10);
    if (!end || *end) fail(x.line, "expected a number, got '" + t + "'");
    return v;
}

std::vector<uint8_t> hex_of(const Sx& x) {
    const std::string& t = atom(x);
    if (t.size() < 2 || t[0] != '0' || t[1] != 'x' || t.size() % 2)
        fail(x.line, "expected hex bytes, got '" + t + "'");
    auto nib = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        fail(x.line, "bad hex digit");
    };
    std::vector<uint8_t> out;
    for (size_t i = 2; i < t.size(); i += 2)
        out.push_back(static_cast<uint8_t>(nib(t[i]) * 16 + nib(t[i + 1])));
    return out;
}

ir::LType type_of(const Sx& x) {
    if (x.is_atom) {
        if (x.atom == "undef") return ir::LType::undef();
        if (x.atom == "float") return ir::LType::floating();
        if (x.atom == "bool") return ir::LType::boolean();
        if (x.atom == "string") return ir::LType::string_ty();
        if (x.atom == "address") return ir::LType::address();
        fail(x.line, "unknown type '" + x.atom + "'");
    }
    const std::string& h = head(x);
    if (h == "int") {
        unsigned bits = static_cast<unsigned>(number_of(kid(x, 1)));
        const std::string& s = atom(kid(x, 2));
        if (s != "u" && s != "s") fail(x.line, "int sign must be u or s");
        return ir::LType::integer(bits, s == "u" ? ir::Sign::Unsigned : ir::Sign::Signed);
    }
    if (h == "bytes") return ir::LType::bytes(static_cast<unsigned>(number_of(kid(x, 1))));
    if (h == "array") {
        ir::LType elem = type_of(kid(x, 1));
        std::optional<uint64_t> len;
        if (x.kids.size() > 2) len = number_of(kid(x, 2));
        return ir::LType::array(elem, len);
    }
    if (h == "mapping") return ir::LType::mapping(type_of(kid(x, 1)), type_of(kid(x, 2)));
    if (h == "struct") return ir::LType::struct_ty(atom(kid(x, 1)));
    if (h == "contract") return ir::LType::contract(atom(kid(x, 1)));
    if (h == "fn") {
        const Sx& ps = kid(x, 1);
        if (ps.is_atom) fail(x.line, "fn wants a parameter list");
        std::vector<ir::LType> params;
        for (const auto& p : ps.kids) params.push_back(type_of(p));
        return ir::LType::fun(std::move(params), type_of(kid(x, 2)));
    }
    fail(x.line, "unknown type form '" + h + "'");
}

ir::Literal literal_of(const Sx& x) {
    ir::LType ty = type_of(kid(x, 1));
    switch (ty.kind()) {
        case ir::LType::Kind::Undef: return ir::Literal::undef();
        case ir::LType::Kind::Bool: {
            const std::string& b = atom(kid(x, 2));
            if (b != "true" && b != "false") fail(x.line, "bad boolean literal");
            return ir::Literal::boolean(b == "true");
        }
        case ir::LType::Kind::Int:
            return ir::Literal::integer(ty.bits(), ty.sign(), ir::Int(atom(kid(x, 2))));
        case ir::LType::Kind::Float:
            return ir::Literal::floating(std::strtod(atom(kid(x, 2)).c_str(), nullptr));
        case ir::LType::Kind::String: {
            const Sx& s = kid(x, 2);
            if (!s.is_string) fail(x.line, "expected a string literal");
            return ir::Literal::string_lit(s.atom);
        }
        case ir::LType::Kind::Bytes:
            return ir::Literal::bytes_lit(ty.byte_len(), hex_of(kid(x, 2)));
        case ir::LType::Kind::Address:
            return ir::Literal::address_lit(hex_of(kid(x, 2)));
        default:
            fail(x.line, "type cannot head a constant");
    }
}

std::optional<ir::BinOp> binop_of(const std::string& name) {
    using B = ir::BinOp;
    for (B op : {B::Add, B::Sub, B::Mul, B::Div, B::Mod, B::Eq, B::Ne, B::Lt,
                 B::Le, B::Gt, B::Ge, B::And, B::Or})
        if (name == ir::binop_text(op)) return op;
    return std::nullopt;
}

ir::ExprPtr expr_of(const Sx& x) {
    if (x.is_atom) fail(x.line, "expected an expression form");
    const std::string& h = head(x);
    if (h == "const") return ir::Expr::constant(literal_of(x));
    if (h == "var") return ir::Expr::var(atom(kid(x, 1)), type_of(kid(x, 2)));
    if (h == "par") return ir::Expr::par(atom(kid(x, 1)), type_of(kid(x, 2)));
    if (h == "fnref") return ir::Expr::fun(atom(kid(x, 1)), type_of(kid(x, 2)));
    if (auto b = binop_of(h))
        return ir::Expr::binop(*b, expr_of(kid(x, 1)), expr_of(kid(x, 2)));
    if (h == "not") return ir::Expr::unop(ir::UnOp::Not, expr_of(kid(x, 1)));
    if (h == "neg") return ir::Expr::unop(ir::UnOp::Neg, expr_of(kid(x, 1)));
    if (h == "cast") return ir::Expr::cast(type_of(kid(x, 1)), expr_of(kid(x, 2)));
    if (h == "field") {
        const Sx& base = kid(x, 1);
        const Sx& paths = kid(x, 2);
        if (paths.is_atom) fail(x.line, "field wants a member list");
        std::vector<std::string> path;
        for (const auto& p : paths.kids) path.push_back(atom(p));
        ir::LType ty = type_of(kid(x, 3));
        if (base.is_atom) {
            ir::SpecialRef r;
            if (base.atom == "msg") r = ir::SpecialRef::Msg;
            else if (base.atom == "this") r = ir::SpecialRef::This;
            else if (base.atom == "block") r = ir::SpecialRef::Block;
            else fail(base.line, "unknown reserved base '" + base.atom + "'");
            return ir::Expr::field_special(r, std::move(path), ty);
        }
        return ir::Expr::field(expr_of(base), std::move(path), ty);
    }
    if (h == "index") return ir::Expr::index(expr_of(kid(x, 1)), expr_of(kid(x, 2)));
    if (h == "slit") {
        ir::LType ty = type_of(kid(x, 1));
        std::vector<std::pair<std::string, ir::ExprPtr>> members;
        for (size_t i = 2; i < x.kids.size(); ++i) {
            const Sx& m = x.kids[i];
            if (m.is_atom || m.kids.size() != 2) fail(m.line, "bad member form");
            members.emplace_back(atom(kid(m, 0)), expr_of(kid(m, 1)));
        }
        return ir::Expr::struct_lit(ty, std::move(members));
    }
    fail(x.line, "unknown expression form '" + h + "'");
}

std::optional<ir::Visibility> vis_of(const Sx& x) {
    const std::string& t = atom(x);
    if (t == "-") return std::nullopt;
    if (t == "public") return ir::Visibility::Public;
    if (t == "private") return ir::Visibility::Private;
    if (t == "internal") return ir::Visibility::Internal;
    fail(x.line, "unknown visibility '" + t + "'");
}

ir::StmtPtr stmt_of(const Sx& x) {
    if (x.is_atom) fail(x.line, "expected a statement form");
    const std::string& h = head(x);
    int line = x.line;
    if (h == "nil") return ir::Statement::nil();
    if (h == "throw") return ir::Statement::throw_(line);
    if (h == "return")
        return ir::Statement::ret(x.kids.size() > 1 ? expr_of(kid(x, 1)) : nullptr, line);
    if (h == "assign")
        return ir::Statement::assign(expr_of(kid(x, 1)), expr_of(kid(x, 2)), line);
    if (h == "call") {
        std::vector<ir::ExprPtr> args;
        for (size_t i = 2; i < x.kids.size(); ++i) args.push_back(expr_of(x.kids[i]));
        return ir::Statement::fun_call(expr_of(kid(x, 1)), std::move(args), line);
    }
    if (h == "decl")
        return ir::Statement::var_decl(vis_of(kid(x, 1)), expr_of(kid(x, 2)), line);
    if (h == "struct") {
        std::vector<std::pair<ir::LType, std::string>> members;
        for (size_t i = 2; i < x.kids.size(); ++i) {
            const Sx& m = x.kids[i];
            if (m.is_atom || m.kids.size() != 2) fail(m.line, "bad member form");
            members.emplace_back(type_of(kid(m, 1)), atom(kid(m, 0)));
        }
        return ir::Statement::struct_decl(atom(kid(x, 1)), std::move(members), line);
    }
    if (h == "seq") {
        ir::Program body;
        for (size_t i = 1; i < x.kids.size(); ++i) body.push_back(stmt_of(x.kids[i]));
        return ir::Statement::seq(std::move(body), line);
    }
    if (h == "if")
        return ir::Statement::if_(expr_of(kid(x, 1)), stmt_of(kid(x, 2)),
                                  stmt_of(kid(x, 3)), line);
    if (h == "while")
        return ir::Statement::while_(expr_of(kid(x, 1)), stmt_of(kid(x, 2)), line);
    if (h == "for")
        return ir::Statement::for_(stmt_of(kid(x, 2)), expr_of(kid(x, 1)),
                                   stmt_of(kid(x, 3)), stmt_of(kid(x, 4)), line);
    if (h == "fun") {
        const Sx& ps = kid(x, 3);
        if (ps.is_atom || ps.kids.empty() || atom(kid(ps, 0)) != "params")
            fail(x.line, "fun wants a (params ...) list");
        std::vector<ir::ExprPtr> params;
        for (size_t i = 1; i < ps.kids.size(); ++i) params.push_back(expr_of(ps.kids[i]));
        ir::Program body;
        for (size_t i = 4; i < x.kids.size(); ++i) body.push_back(stmt_of(x.kids[i]));
        return ir::Statement::fun(vis_of(kid(x, 1)), expr_of(kid(x, 2)),
                                  std::move(params), std::move(body), line);
    }
    if (h == "contract") {
        const Sx& ps = kid(x, 2);
        if (ps.is_atom || ps.kids.empty() || atom(kid(ps, 0)) != "parents")
            fail(x.line, "contract wants a (parents ...) list");
        std::vector<std::string> parents;
        for (size_t i = 1; i < ps.kids.size(); ++i) parents.push_back(atom(ps.kids[i]));
        ir::Program body;
        for (size_t i = 3; i < x.kids.size(); ++i) body.push_back(stmt_of(x.kids[i]));
        return ir::Statement::contract(expr_of(kid(x, 1)), std::move(parents),
                                       std::move(body), line);
    }
    fail(x.line, "unknown statement form '" + h + "'");
}

void bind_decls(const ir::Program& p, ir::TypeContext& ctx) {
    for (const auto& s : p) {
        if (!s) continue;
        switch (s->kind) {
            case ir::Statement::Kind::Var:
                if (s->e1) ctx.vars[s->e1->name] = s->e1->out_ty;
                break;
            case ir::Statement::Kind::StructDecl: {
                ir::StructLayout layout;
                for (const auto& [ty, name] : s->members) layout.emplace_back(name, ty);
                ctx.structs.layouts[s->name] = std::move(layout);
                break;
            }
            case ir::Statement::Kind::Fun: {
                std::vector<ir::LType> params;
                for (const auto& p2 : s->args) {
                    ctx.vars[p2->name] = p2->out_ty;
                    params.push_back(p2->out_ty);
                }
                if (s->e1) ctx.funs[s->e1->name] = ir::LType::fun(params, s->e1->out_ty);
                bind_decls(s->stmts, ctx);
                break;
            }
            case ir::Statement::Kind::Contract:
                if (s->e1) ctx.vars[s->e1->name] = s->e1->out_ty;
                bind_decls(s->stmts, ctx);
                break;
            case ir::Statement::Kind::Seq:
                bind_decls(s->stmts, ctx);
                break;
            case ir::Statement::Kind::If:
                bind_decls({s->s1, s->s2}, ctx);
                break;
            case ir::Statement::Kind::While:
                bind_decls({s->s1}, ctx);
                break;
            case ir::Statement::Kind::For:
                bind_decls({s->s1, s->s2, s->s3}, ctx);
                break;
            default:
                break;
        }
    }
}

}  // namespace

ReadResult read_program(const std::string& text) {
    try {
        SxScanner scanner(text);
        ir::Program out;
        for (const Sx& form : scanner.top_level()) out.push_back(stmt_of(form));
        return {std::move(out), std::nullopt};
    } catch (const Fail& f) {
        return {std::nullopt,
                FrontendError{FrontendError::Kind::Read, f.line, f.msg}};
    }
}

ir::TypeContext build_context(const ir::Program& p, unsigned uint_bits) {
    ir::TypeContext ctx;
    germ::StdLib lib{uint_bits};
    lib.install_types(ctx);
    bind_decls(p, ctx);
    return ctx;
}

namespace {

void intern_stmt_decls(const ir::StmtPtr& s, AddressTable& table);

void intern_block_decls(const ir::Program& p, AddressTable& table) {
    for (const auto& s : p) intern_stmt_decls(s, table);
}

void intern_fun_decl(const ir::StmtPtr& s, AddressTable& table) {
    if (s->e1) table.intern(s->e1->name + "()");
    for (const auto& p : s->args)
        if (p) table.intern(p->name);
    intern_block_decls(s->stmts, table);
}

void intern_stmt_decls(const ir::StmtPtr& s, AddressTable& table) {
    if (!s) return;
    switch (s->kind) {
        case ir::Statement::Kind::Var:
            if (s->e1) table.intern(s->e1->name);
            break;
        case ir::Statement::Kind::StructDecl:
            table.intern(s->name);
            break;
        case ir::Statement::Kind::Fun:
            intern_fun_decl(s, table);
            break;
        case ir::Statement::Kind::Contract:
            // State and struct slots precede the contract cell; function
            // slots follow it, matching the translator's numbering.
            for (const auto& c : s->stmts) {
                if (!c) continue;
                if (c->kind == ir::Statement::Kind::Var && c->e1)
                    table.intern(c->e1->name);
                else if (c->kind == ir::Statement::Kind::StructDecl)
                    table.intern(c->name);
            }
            if (s->e1) table.intern(s->e1->name);
            for (const auto& c : s->stmts)
                if (c && c->kind == ir::Statement::Kind::Fun) intern_fun_decl(c, table);
            break;
        case ir::Statement::Kind::Seq:
            intern_block_decls(s->stmts, table);
            break;
        case ir::Statement::Kind::If:
            intern_stmt_decls(s->s1, table);
            intern_stmt_decls(s->s2, table);
            break;
        case ir::Statement::Kind::While:
            intern_stmt_decls(s->s1, table);
            break;
        case ir::Statement::Kind::For:
            intern_stmt_decls(s->s1, table);
            intern_stmt_decls(s->s2, table);
            intern_stmt_decls(s->s3, table);
            break;
        default:
            break;
    }
}

}  // namespace

AddressTable build_table(const ir::Program& p) {
    AddressTable table;
    intern_block_decls(p, table);
    return table;
}

}  // namespace fspvm::frontend
