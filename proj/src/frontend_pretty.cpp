#include <sstream>

#include "fspvm/frontend.hpp"

namespace fspvm::frontend {

namespace {

void escape_into(std::ostream& out, const std::string& s) {
    out << '"';
    for (char c : s) {
        switch (c) {
            case '"': out << "\\\""; break;
            case '\\': out << "\\\\"; break;
            case '\n': out << "\\n"; break;
            case '\t': out << "\\t"; break;
            default: out << c;
        }
    }
    out << '"';
}

void hex_into(std::ostream& out, const std::vector<uint8_t>& data) {
    static const char* digits = "0123456789abcdef";
    out << "0x";
    for (uint8_t b : data) out << digits[b >> 4] << digits[b & 0xf];
}

void expr_into(std::ostream& out, const ir::ExprPtr& e) {
    using K = ir::Expr::Kind;
    switch (e->kind) {
        case K::Const: {
            const ir::Literal& l = e->lit;
            out << "(const " << l.ty.text();
            switch (l.ty.kind()) {
                case ir::LType::Kind::Undef: break;
                case ir::LType::Kind::Bool: out << (l.b ? " true" : " false"); break;
                case ir::LType::Kind::Int: out << ' ' << l.i; break;
                case ir::LType::Kind::Float: out << ' ' << l.f; break;
                case ir::LType::Kind::String:
                    out << ' ';
                    escape_into(out, l.str);
                    break;
                case ir::LType::Kind::Bytes:
                case ir::LType::Kind::Address:
                    out << ' ';
                    hex_into(out, l.bytes);
                    break;
                default: break;
            }
            out << ')';
            break;
        }
        case K::Var:
            out << "(var " << e->name << ' ' << e->out_ty.text() << ')';
            break;
        case K::Par:
            out << "(par " << e->name << ' ' << e->out_ty.text() << ')';
            break;
        case K::Fun:
            out << "(fnref " << e->name << ' ' << e->out_ty.text() << ')';
            break;
        case K::Binop:
            out << '(' << ir::binop_text(e->bop) << ' ';
            expr_into(out, e->a);
            out << ' ';
            expr_into(out, e->b);
            out << ')';
            break;
        case K::Unop:
            if (e->uop == ir::UnOp::Cast) {
                out << "(cast " << e->out_ty.text() << ' ';
            } else {
                out << (e->uop == ir::UnOp::Not ? "(not " : "(neg ");
            }
            expr_into(out, e->a);
            out << ')';
            break;
        case K::Field: {
            out << "(field ";
            if (e->base_is_special) {
                out << ir::special_ref_name(e->sref);
            } else {
                expr_into(out, e->a);
            }
            out << " (";
            for (size_t i = 0; i < e->path.size(); ++i) {
                if (i) out << ' ';
                out << e->path[i];
            }
            out << ") " << e->out_ty.text() << ')';
            break;
        }
        case K::Index:
            out << "(index ";
            expr_into(out, e->a);
            out << ' ';
            expr_into(out, e->b);
            out << ')';
            break;
        case K::StructLit: {
            out << "(slit " << e->out_ty.text();
            for (const auto& [name, sub] : e->members) {
                out << " (" << name << ' ';
                expr_into(out, sub);
                out << ')';
            }
            out << ')';
            break;
        }
    }
}

const char* vis_token(const std::optional<ir::Visibility>& v) {
    return v ? ir::visibility_text(*v) : "-";
}

// `nl` separates child statements: "\n" for the block form, " " for the
// single-line form.
class StmtWriter {
  public:
    StmtWriter(std::ostream& out, bool multiline) : out_(out), ml_(multiline) {}

    void stmt(const ir::StmtPtr& s, int depth) {
        using K = ir::Statement::Kind;
        switch (s->kind) {
            case K::Nil: line(depth, "(nil)"); return;
            case K::Throw: line(depth, "(throw)"); return;
            case K::Return: {
                std::ostringstream o;
                o << "(return";
                if (s->e1) {
                    o << ' ';
                    expr_into(o, s->e1);
                }
                o << ')';
                line(depth, o.str());
                return;
            }
            case K::Assign: {
                std::ostringstream o;
                o << "(assign ";
                expr_into(o, s->e1);
                o << ' ';
                expr_into(o, s->e2);
                o << ')';
                line(depth, o.str());
                return;
            }
            case K::FunCall: {
                std::ostringstream o;
                o << "(call ";
                expr_into(o, s->e1);
                for (const auto& a : s->args) {
                    o << ' ';
                    expr_into(o, a);
                }
                o << ')';
                line(depth, o.str());
                return;
            }
            case K::Var: {
                std::ostringstream o;
                o << "(decl " << vis_token(s->vis) << ' ';
                expr_into(o, s->e1);
                o << ')';
                line(depth, o.str());
                return;
            }
            case K::StructDecl: {
                std::ostringstream o;
                o << "(struct " << s->name;
                for (const auto& [ty, name] : s->members)
                    o << " (" << name << ' ' << ty.text() << ')';
                o << ')';
                line(depth, o.str());
                return;
            }
            case K::Seq:
                open(depth, "(seq");
                for (const auto& c : s->stmts) stmt(c, depth + 1);
                close(depth);
                return;
            case K::If: {
                std::ostringstream o;
                o << "(if ";
                expr_into(o, s->e1);
                open(depth, o.str());
                stmt(s->s1, depth + 1);
                stmt(s->s2, depth + 1);
                close(depth);
                return;
            }
            case K::While: {
                std::ostringstream o;
                o << "(while ";
                expr_into(o, s->e1);
                open(depth, o.str());
                stmt(s->s1, depth + 1);
                close(depth);
                return;
            }
            case K::For: {
                std::ostringstream o;
                o << "(for ";
                expr_into(o, s->e1);
                open(depth, o.str());
                stmt(s->s1, depth + 1);
                stmt(s->s2, depth + 1);
                stmt(s->s3, depth + 1);
                close(depth);
                return;
            }
            case K::Fun: {
                std::ostringstream o;
                o << "(fun " << vis_token(s->vis) << ' ';
                expr_into(o, s->e1);
                o << " (params";
                for (const auto& p : s->args) {
                    o << ' ';
                    expr_into(o, p);
                }
                o << ')';
                open(depth, o.str());
                for (const auto& c : s->stmts) stmt(c, depth + 1);
                close(depth);
                return;
            }
            case K::Contract: {
                std::ostringstream o;
                o << "(contract ";
                expr_into(o, s->e1);
                o << " (parents";
                for (const auto& p : s->parents) o << ' ' << p;
                o << ')';
                open(depth, o.str());
                for (const auto& c : s->stmts) stmt(c, depth + 1);
                close(depth);
                return;
            }
        }
    }

  private:
    void line(int depth, const std::string& body) {
        sep(depth);
        out_ << body;
    }
    void open(int depth, const std::string& head) {
        sep(depth);
        out_ << head;
    }
    void close(int depth) {
        sep(depth);
        out_ << ')';
    }
    void sep(int depth) {
        if (first_) {
            first_ = false;
        } else if (ml_) {
            out_ << '\n';
        } else {
            out_ << ' ';
        }
        if (ml_)
            for (int i = 0; i < depth; ++i) out_ << "  ";
    }

    std::ostream& out_;
    bool ml_;
    bool first_ = true;
};

}  // namespace

std::string pretty_expr(const ir::ExprPtr& e) {
    std::ostringstream out;
    expr_into(out, e);
    return out.str();
}

std::string pretty(const ir::StmtPtr& s) {
    std::ostringstream out;
    StmtWriter w(out, true);
    w.stmt(s, 0);
    out << '\n';
    return out.str();
}

std::string pretty(const ir::Program& p) {
    std::string out;
    for (const auto& s : p) out += pretty(s);
    return out;
}

std::string line_text(const ir::StmtPtr& s) {
    std::ostringstream out;
    StmtWriter w(out, false);
    w.stmt(s, 0);
    return out.str();
}

}  // namespace fspvm::frontend

namespace fspvm::ir {

uint64_t content_hash(const Program& block) {
    std::string text = frontend::pretty(block);
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace fspvm::ir
