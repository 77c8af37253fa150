// Static checker over the typed IR. Expressions are validated post-order
// (leftmost-innermost), so the first report always names the deepest failing
// node. Stored annotations are re-derived and compared; a node whose children
// violate its constructor's typing rule is the error site.
#include "fspvm/ir.hpp"

#include <sstream>

namespace fspvm::ir {

namespace {

bool is_comparable_scalar(const LType& t) {
    switch (t.kind()) {
        case LType::Kind::Int:
        case LType::Kind::Bool:
        case LType::Kind::Bytes:
        case LType::Kind::Address:
        case LType::Kind::String:
            return true;
        default:
            return false;
    }
}

struct Checker {
    const TypeContext& ctx;

    TypeError err(TypeErrorCode code, std::string path, std::string msg,
                  std::optional<LType> expected = std::nullopt,
                  std::optional<LType> found = std::nullopt) const {
        return TypeError{code, std::move(path), std::move(msg), std::move(expected),
                         std::move(found)};
    }

    // Walks a member path starting from `base`, one struct layer per segment.
    std::optional<LType> walk_path(const StructLayout* layout, LType base,
                                   const std::vector<std::string>& path,
                                   const std::string& where, TypeError* out) const {
        LType cur = base;
        for (size_t i = 0; i < path.size(); ++i) {
            const StructLayout* l = layout;
            if (i > 0 || !l) {
                if (cur.kind() != LType::Kind::Struct) {
                    *out = err(TypeErrorCode::TypeMismatch, where,
                               "member access on non-struct", std::nullopt, cur);
                    return std::nullopt;
                }
                l = ctx.structs.find(cur.name());
                if (!l) {
                    *out = err(TypeErrorCode::UnboundIdentifier, where,
                               "unknown struct layout " + cur.name());
                    return std::nullopt;
                }
            }
            const LType* m = nullptr;
            for (const auto& [n, t] : *l)
                if (n == path[i]) m = &t;
            if (!m) {
                *out = err(TypeErrorCode::UnboundIdentifier, where,
                           "no member named " + path[i]);
                return std::nullopt;
            }
            cur = *m;
            layout = nullptr;
        }
        return cur;
    }

    ExprCheck check_expr(const ExprPtr& e, const std::string& path) const {
        switch (e->kind) {
            case Expr::Kind::Const:
                return {e->lit.ty, std::nullopt};

            case Expr::Kind::Var:
            case Expr::Kind::Par: {
                auto it = ctx.vars.find(e->name);
                if (it == ctx.vars.end())
                    return {std::nullopt, err(TypeErrorCode::UnboundIdentifier, path,
                                              "unbound identifier " + e->name)};
                if (!(it->second == e->out_ty))
                    return {std::nullopt,
                            err(TypeErrorCode::TypeMismatch, path,
                                "annotation disagrees with declaration of " + e->name,
                                it->second, e->out_ty)};
                return {it->second, std::nullopt};
            }

            case Expr::Kind::Fun: {
                auto it = ctx.funs.find(e->name);
                if (it == ctx.funs.end())
                    return {std::nullopt, err(TypeErrorCode::UnboundIdentifier, path,
                                              "unbound function " + e->name)};
                if (!(it->second.ret() == e->out_ty))
                    return {std::nullopt,
                            err(TypeErrorCode::TypeMismatch, path,
                                "return annotation disagrees for " + e->name,
                                it->second.ret(), e->out_ty)};
                return {e->out_ty, std::nullopt};
            }

            case Expr::Kind::Binop: {
                auto l = check_expr(e->a, path + ".l");
                if (l.error) return l;
                auto r = check_expr(e->b, path + ".r");
                if (r.error) return r;
                switch (e->bop) {
                    case BinOp::Add: case BinOp::Sub: case BinOp::Mul:
                    case BinOp::Div: case BinOp::Mod:
                        if (!l.ty->is_int() || !(*l.ty == *r.ty))
                            return {std::nullopt,
                                    err(TypeErrorCode::TypeMismatch, path,
                                        "arithmetic needs matching integer operands",
                                        *l.ty, *r.ty)};
                        return {*l.ty, std::nullopt};
                    case BinOp::Eq: case BinOp::Ne:
                        if (!(*l.ty == *r.ty) || !is_comparable_scalar(*l.ty))
                            return {std::nullopt,
                                    err(TypeErrorCode::TypeMismatch, path,
                                        "equality needs matching scalar operands",
                                        *l.ty, *r.ty)};
                        return {LType::boolean(), std::nullopt};
                    case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
                        if (!l.ty->is_int() || !(*l.ty == *r.ty))
                            return {std::nullopt,
                                    err(TypeErrorCode::TypeMismatch, path,
                                        "ordering needs matching integer operands",
                                        *l.ty, *r.ty)};
                        return {LType::boolean(), std::nullopt};
                    case BinOp::And: case BinOp::Or:
                        if (!l.ty->is_bool() || !r.ty->is_bool())
                            return {std::nullopt,
                                    err(TypeErrorCode::TypeMismatch, path,
                                        "logical connective needs boolean operands",
                                        LType::boolean(),
                                        l.ty->is_bool() ? *r.ty : *l.ty)};
                        return {LType::boolean(), std::nullopt};
                }
                return {std::nullopt,
                        err(TypeErrorCode::TypeMismatch, path, "bad operator")};
            }

            case Expr::Kind::Unop: {
                auto c = check_expr(e->a, path + ".arg");
                if (c.error) return c;
                switch (e->uop) {
                    case UnOp::Not:
                        if (!c.ty->is_bool())
                            return {std::nullopt,
                                    err(TypeErrorCode::TypeMismatch, path,
                                        "negation needs a boolean operand",
                                        LType::boolean(), *c.ty)};
                        return {LType::boolean(), std::nullopt};
                    case UnOp::Neg:
                        if (!c.ty->is_int() || c.ty->sign() != Sign::Signed)
                            return {std::nullopt,
                                    err(TypeErrorCode::TypeMismatch, path,
                                        "arithmetic negation needs a signed integer",
                                        std::nullopt, *c.ty)};
                        return {*c.ty, std::nullopt};
                    case UnOp::Cast:
                        if (!c.ty->is_int() || !e->out_ty.is_int())
                            return {std::nullopt,
                                    err(TypeErrorCode::TypeMismatch, path,
                                        "cast is integer-to-integer only",
                                        e->out_ty, *c.ty)};
                        return {e->out_ty, std::nullopt};
                }
                return {std::nullopt,
                        err(TypeErrorCode::TypeMismatch, path, "bad operator")};
            }

            case Expr::Kind::Field: {
                TypeError fail{TypeErrorCode::TypeMismatch, path, ""};
                std::optional<LType> final_ty;
                if (e->base_is_special) {
                    auto it = ctx.special_layouts.find(special_ref_name(e->sref));
                    if (it == ctx.special_layouts.end())
                        return {std::nullopt,
                                err(TypeErrorCode::UnboundIdentifier, path,
                                    std::string("no layout for ") +
                                        special_ref_name(e->sref))};
                    final_ty = walk_path(&it->second, LType::undef(), e->path, path,
                                         &fail);
                } else {
                    auto base = check_expr(e->a, path + ".base");
                    if (base.error) return base;
                    final_ty = walk_path(nullptr, *base.ty, e->path, path, &fail);
                }
                if (!final_ty) return {std::nullopt, fail};
                if (!(*final_ty == e->out_ty))
                    return {std::nullopt,
                            err(TypeErrorCode::TypeMismatch, path,
                                "annotation disagrees with member type", *final_ty,
                                e->out_ty)};
                return {*final_ty, std::nullopt};
            }

            case Expr::Kind::Index: {
                auto base = check_expr(e->a, path + ".base");
                if (base.error) return base;
                auto key = check_expr(e->b, path + ".key");
                if (key.error) return key;
                if (base.ty->kind() == LType::Kind::Mapping) {
                    if (!(*key.ty == base.ty->key()))
                        return {std::nullopt,
                                err(TypeErrorCode::TypeMismatch, path,
                                    "mapping key type mismatch", base.ty->key(),
                                    *key.ty)};
                    return {base.ty->value(), std::nullopt};
                }
                if (base.ty->kind() == LType::Kind::Array) {
                    if (!key.ty->is_int())
                        return {std::nullopt,
                                err(TypeErrorCode::TypeMismatch, path,
                                    "array index must be an integer", std::nullopt,
                                    *key.ty)};
                    return {base.ty->elem(), std::nullopt};
                }
                return {std::nullopt, err(TypeErrorCode::TypeMismatch, path,
                                          "indexing a non-indexable value",
                                          std::nullopt, *base.ty)};
            }

            case Expr::Kind::StructLit: {
                if (e->out_ty.kind() != LType::Kind::Struct)
                    return {std::nullopt, err(TypeErrorCode::TypeMismatch, path,
                                              "struct literal annotation is not a "
                                              "struct type")};
                const StructLayout* layout = ctx.structs.find(e->out_ty.name());
                if (!layout)
                    return {std::nullopt,
                            err(TypeErrorCode::UnboundIdentifier, path,
                                "unknown struct layout " + e->out_ty.name())};
                if (e->members.size() != layout->size())
                    return {std::nullopt,
                            err(TypeErrorCode::ArityMismatch, path,
                                "struct literal member count mismatch")};
                for (size_t i = 0; i < layout->size(); ++i) {
                    std::string mpath =
                        path + ".member[" + std::to_string(i) + "]";
                    auto m = check_expr(e->members[i].second, mpath);
                    if (m.error) return m;
                    if (e->members[i].first != (*layout)[i].first)
                        return {std::nullopt,
                                err(TypeErrorCode::TypeMismatch, mpath,
                                    "member name mismatch: expected " +
                                        (*layout)[i].first)};
                    if (!(*m.ty == (*layout)[i].second))
                        return {std::nullopt,
                                err(TypeErrorCode::TypeMismatch, mpath,
                                    "member type mismatch", (*layout)[i].second,
                                    *m.ty)};
                }
                return {e->out_ty, std::nullopt};
            }
        }
        return {std::nullopt, err(TypeErrorCode::TypeMismatch, path, "bad node")};
    }

    bool is_lvalue(const ExprPtr& e) const {
        const Expr* cur = e.get();
        while (true) {
            switch (cur->kind) {
                case Expr::Kind::Var:
                case Expr::Kind::Par:
                    return true;
                case Expr::Kind::Field:
                    if (cur->base_is_special) return false;  // reserved cells are read-only
                    cur = cur->a.get();
                    break;
                case Expr::Kind::Index:
                    cur = cur->a.get();
                    break;
                default:
                    return false;
            }
        }
    }

    std::optional<TypeError> check_stmt(const StmtPtr& s, const std::string& path) const {
        switch (s->kind) {
            case Statement::Kind::Nil:
            case Statement::Kind::Throw:
                return std::nullopt;

            case Statement::Kind::Seq:
                return check_block(s->stmts, path);

            case Statement::Kind::Var: {
                if (!s->e1 || (s->e1->kind != Expr::Kind::Var &&
                               s->e1->kind != Expr::Kind::Par))
                    return err(TypeErrorCode::TypeMismatch, path + ".decl",
                               "declaration must name a variable");
                if (s->e1->out_ty.kind() == LType::Kind::Undef)
                    return err(TypeErrorCode::TypeMismatch, path + ".decl",
                               "cannot declare a variable of undef type");
                auto c = check_expr(s->e1, path + ".decl");
                return c.error;
            }

            case Statement::Kind::StructDecl: {
                const StructLayout* layout = ctx.structs.find(s->name);
                if (!layout)
                    return err(TypeErrorCode::UnboundIdentifier, path,
                               "struct " + s->name + " not registered");
                for (const auto& [ty, n] : s->members) {
                    (void)n;
                    if (ty.kind() == LType::Kind::Undef)
                        return err(TypeErrorCode::TypeMismatch, path,
                                   "struct member of undef type");
                }
                return std::nullopt;
            }

            case Statement::Kind::Assign: {
                auto l = check_expr(s->e1, path + ".lhs");
                if (l.error) return l.error;
                auto r = check_expr(s->e2, path + ".rhs");
                if (r.error) return r.error;
                if (!is_lvalue(s->e1))
                    return err(TypeErrorCode::TypeMismatch, path + ".lhs",
                               "target is not assignable");
                if (!(*l.ty == *r.ty))
                    return err(TypeErrorCode::AssignTypeMismatch, path,
                               "assignment sides have different types", *l.ty, *r.ty);
                return std::nullopt;
            }

            case Statement::Kind::If: {
                auto c = check_expr(s->e1, path + ".cond");
                if (c.error) return c.error;
                if (!c.ty->is_bool())
                    return err(TypeErrorCode::ConditionNotBool, path + ".cond",
                               "branch condition must be boolean", LType::boolean(),
                               *c.ty);
                if (auto e = check_stmt(s->s1, path + ".then")) return e;
                return check_stmt(s->s2, path + ".else");
            }

            case Statement::Kind::While: {
                auto c = check_expr(s->e1, path + ".cond");
                if (c.error) return c.error;
                if (!c.ty->is_bool())
                    return err(TypeErrorCode::ConditionNotBool, path + ".cond",
                               "loop condition must be boolean", LType::boolean(),
                               *c.ty);
                return check_stmt(s->s1, path + ".body");
            }

            case Statement::Kind::For: {
                if (auto e = check_stmt(s->s1, path + ".init")) return e;
                auto c = check_expr(s->e1, path + ".cond");
                if (c.error) return c.error;
                if (!c.ty->is_bool())
                    return err(TypeErrorCode::ConditionNotBool, path + ".cond",
                               "loop condition must be boolean", LType::boolean(),
                               *c.ty);
                if (auto e = check_stmt(s->s2, path + ".step")) return e;
                return check_stmt(s->s3, path + ".body");
            }

            case Statement::Kind::Fun: {
                auto sig = check_expr(s->e1, path + ".sig");
                if (sig.error) return sig.error;
                for (size_t i = 0; i < s->args.size(); ++i) {
                    auto p = check_expr(s->args[i],
                                        path + ".param[" + std::to_string(i) + "]");
                    if (p.error) return p.error;
                }
                return check_block(s->stmts, path);
            }

            case Statement::Kind::FunCall: {
                if (!s->e1 || s->e1->kind != Expr::Kind::Fun)
                    return err(TypeErrorCode::TypeMismatch, path + ".callee",
                               "call target must be a function reference");
                auto callee = check_expr(s->e1, path + ".callee");
                if (callee.error) return callee.error;
                const LType& sig = ctx.funs.at(s->e1->name);
                if (s->args.size() != sig.param_count())
                    return err(TypeErrorCode::ArityMismatch, path,
                               "call passes " + std::to_string(s->args.size()) +
                                   " arguments, function takes " +
                                   std::to_string(sig.param_count()));
                for (size_t i = 0; i < s->args.size(); ++i) {
                    std::string apath = path + ".arg[" + std::to_string(i) + "]";
                    auto a = check_expr(s->args[i], apath);
                    if (a.error) return a.error;
                    if (!(*a.ty == sig.params()[i]))
                        return err(TypeErrorCode::TypeMismatch, apath,
                                   "argument type mismatch", sig.params()[i], *a.ty);
                }
                return std::nullopt;
            }

            case Statement::Kind::Return:
                if (s->e1) {
                    auto c = check_expr(s->e1, path + ".value");
                    return c.error;
                }
                return std::nullopt;

            case Statement::Kind::Contract: {
                auto n = check_expr(s->e1, path + ".name");
                if (n.error) return n.error;
                return check_block(s->stmts, path);
            }
        }
        return err(TypeErrorCode::TypeMismatch, path, "bad statement");
    }

    std::optional<TypeError> check_block(const Program& p,
                                         const std::string& prefix) const {
        for (size_t i = 0; i < p.size(); ++i) {
            std::string path = prefix.empty()
                                   ? "stmt[" + std::to_string(i) + "]"
                                   : prefix + ".stmt[" + std::to_string(i) + "]";
            if (auto e = check_stmt(p[i], path)) return e;
        }
        return std::nullopt;
    }
};

}  // namespace

ExprCheck typecheck_expr(const ExprPtr& e, const TypeContext& ctx) {
    return Checker{ctx}.check_expr(e, "expr");
}

TypeReport typecheck_stmt(const StmtPtr& s, const TypeContext& ctx) {
    auto e = Checker{ctx}.check_stmt(s, "stmt");
    return TypeReport{!e.has_value(), std::move(e)};
}

TypeReport typecheck_program(const Program& p, const TypeContext& ctx) {
    auto e = Checker{ctx}.check_block(p, "");
    return TypeReport{!e.has_value(), std::move(e)};
}

}  // namespace fspvm::ir
