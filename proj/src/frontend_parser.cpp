// Recursive-descent parser for the contract-language subset. Operator
// precedence mirrors the source language: || < && < equality < relational <
// additive < multiplicative < unary < postfix.
#include <cstdlib>

#include "frontend_ast.hpp"

namespace fspvm::frontend::ast {

namespace {

struct Fail {
    FrontendError::Kind kind;
    int line;
    std::string msg;
};

[[noreturn]] void fail(int line, std::string msg) {
    throw Fail{FrontendError::Kind::Parse, line, std::move(msg)};
}
[[noreturn]] void unsupported(int line, std::string what) {
    throw Fail{FrontendError::Kind::Unsupported, line, std::move(what)};
}

bool is_builtin_type_name(const std::string& t) {
    if (t == "bool" || t == "address" || t == "string" || t == "byte" || t == "var")
        return true;
    auto prefixed_width = [&](const char* prefix) {
        size_t n = std::strlen(prefix);
        if (t.compare(0, n, prefix) != 0) return false;
        if (t.size() == n) return true;
        for (size_t i = n; i < t.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
        return true;
    };
    return prefixed_width("uint") || prefixed_width("int") || prefixed_width("bytes");
}

const char* const kUnsupportedKeywords[] = {
    "assembly", "import",   "library", "interface", "modifier",
    "event",    "enum",     "using",   "delete",    "new",
    "emit",     "selfdestruct",
};

class Parser {
  public:
    explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

    SourceUnit unit() {
        SourceUnit out;
        while (!at_end()) {
            if (is_ident("pragma")) {
                while (!at_end() && !is_punct(";")) advance();
                expect_punct(";");
                continue;
            }
            if (is_ident("contract")) {
                out.contracts.push_back(contract_decl());
                continue;
            }
            check_unsupported();
            fail(peek().line, "expected a contract, got '" + peek().text + "'");
        }
        if (out.contracts.empty()) fail(1, "no contract in input");
        return out;
    }

  private:
    // ---- token plumbing

    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at_end() const { return peek().kind == TokenKind::End; }
    const Token& advance() { return toks_[pos_++]; }

    bool is_punct(const char* p, size_t ahead = 0) const {
        return peek(ahead).kind == TokenKind::Punct && peek(ahead).text == p;
    }
    bool is_ident(const char* name, size_t ahead = 0) const {
        return peek(ahead).kind == TokenKind::Identifier && peek(ahead).text == name;
    }
    bool match_punct(const char* p) {
        if (!is_punct(p)) return false;
        advance();
        return true;
    }
    bool match_ident(const char* name) {
        if (!is_ident(name)) return false;
        advance();
        return true;
    }
    void expect_punct(const char* p) {
        if (!match_punct(p))
            fail(peek().line, std::string("expected '") + p + "', got '" +
                                  peek().text + "'");
    }
    std::string expect_ident(const char* what) {
        if (peek().kind != TokenKind::Identifier)
            fail(peek().line, std::string("expected ") + what + ", got '" +
                                  peek().text + "'");
        return advance().text;
    }
    void check_unsupported() const {
        if (peek().kind != TokenKind::Identifier) return;
        for (const char* k : kUnsupportedKeywords)
            if (peek().text == k) unsupported(peek().line, peek().text);
    }

    // ---- types

    bool at_type_start() const {
        if (peek().kind != TokenKind::Identifier) return false;
        return is_builtin_type_name(peek().text) || peek().text == "mapping";
    }

    TypeRefP type_ref() {
        int line = peek().line;
        if (match_ident("mapping")) {
            expect_punct("(");
            TypeRefP key = type_ref();
            expect_punct("=>");
            TypeRefP val = type_ref();
            expect_punct(")");
            auto t = std::make_shared<TypeRef>();
            t->kind = TypeRef::K::Mapping;
            t->key = std::move(key);
            t->val = std::move(val);
            t->line = line;
            return array_suffix(std::move(t));
        }
        std::string name = expect_ident("a type name");
        if (name == "var") unsupported(line, "var");
        auto t = std::make_shared<TypeRef>();
        t->kind = TypeRef::K::Named;
        t->name = std::move(name);
        t->line = line;
        return array_suffix(std::move(t));
    }

    TypeRefP array_suffix(TypeRefP base) {
        while (is_punct("[")) {
            int line = peek().line;
            advance();
            std::optional<uint64_t> len;
            if (peek().kind == TokenKind::Number)
                len = std::strtoull(advance().text.c_str(), nullptr, 0);
            expect_punct("]");
            auto t = std::make_shared<TypeRef>();
            t->kind = TypeRef::K::Array;
            t->elem = std::move(base);
            t->len = len;
            t->line = line;
            base = std::move(t);
        }
        return base;
    }

    // ---- expressions

    ExprP expression() { return binary(0); }

    struct Level {
        const char* ops[5];
    };

    ExprP binary(int level) {
        static const Level kLevels[] = {
            {{"||", nullptr}},
            {{"&&", nullptr}},
            {{"==", "!=", nullptr}},
            {{"<", "<=", ">", ">=", nullptr}},
            {{"+", "-", nullptr}},
            {{"*", "/", "%", nullptr}},
        };
        constexpr int kMax = 6;
        if (level >= kMax) return unary();
        ExprP lhs = binary(level + 1);
        while (true) {
            const char* hit = nullptr;
            for (const char* const* p = kLevels[level].ops; *p; ++p)
                if (is_punct(*p)) {
                    hit = *p;
                    break;
                }
            if (!hit) return lhs;
            int line = advance().line;
            ExprP rhs = binary(level + 1);
            auto e = std::make_shared<Expr>();
            e->kind = Expr::K::Binary;
            e->op = hit;
            e->a = std::move(lhs);
            e->b = std::move(rhs);
            e->line = line;
            lhs = std::move(e);
        }
    }

    ExprP unary() {
        if (is_punct("!") || (is_punct("-"))) {
            int line = peek().line;
            std::string op = advance().text;
            auto e = std::make_shared<Expr>();
            e->kind = Expr::K::Unary;
            e->op = std::move(op);
            e->a = unary();
            e->line = line;
            return e;
        }
        if (is_punct("?")) unsupported(peek().line, "conditional expression");
        return postfix();
    }

    ExprP postfix() {
        ExprP e = primary();
        while (true) {
            if (is_punct(".")) {
                int line = advance().line;
                auto m = std::make_shared<Expr>();
                m->kind = Expr::K::Member;
                m->a = std::move(e);
                m->member = expect_ident("a member name");
                m->line = line;
                e = std::move(m);
                continue;
            }
            if (is_punct("[")) {
                int line = advance().line;
                auto ix = std::make_shared<Expr>();
                ix->kind = Expr::K::Index;
                ix->a = std::move(e);
                ix->b = expression();
                ix->line = line;
                expect_punct("]");
                e = std::move(ix);
                continue;
            }
            if (is_punct("(")) {
                int line = advance().line;
                auto call = std::make_shared<Expr>();
                call->kind = Expr::K::Call;
                call->a = std::move(e);
                call->line = line;
                if (!is_punct(")")) {
                    do {
                        call->args.push_back(expression());
                    } while (match_punct(","));
                }
                expect_punct(")");
                e = std::move(call);
                continue;
            }
            if (is_punct("?")) unsupported(peek().line, "conditional expression");
            return e;
        }
    }

    ExprP primary() {
        check_unsupported();
        const Token& t = peek();
        if (t.kind == TokenKind::Number) {
            advance();
            auto e = std::make_shared<Expr>();
            e->kind = Expr::K::Number;
            e->text = t.text;
            e->line = t.line;
            return e;
        }
        if (t.kind == TokenKind::StringLit) {
            advance();
            auto e = std::make_shared<Expr>();
            e->kind = Expr::K::StringLit;
            e->text = t.text;
            e->line = t.line;
            return e;
        }
        if (t.kind == TokenKind::Identifier) {
            if (t.text == "true" || t.text == "false") {
                advance();
                auto e = std::make_shared<Expr>();
                e->kind = Expr::K::Bool;
                e->bval = t.text == "true";
                e->line = t.line;
                return e;
            }
            advance();
            auto e = std::make_shared<Expr>();
            e->kind = Expr::K::Ident;
            e->text = t.text;
            e->line = t.line;
            return e;
        }
        if (is_punct("(")) {
            advance();
            ExprP e = expression();
            expect_punct(")");
            return e;
        }
        fail(t.line, "expected an expression, got '" + t.text + "'");
    }

    // ---- statements

    StmtP statement() {
        check_unsupported();
        int line = peek().line;

        if (is_punct("{")) return block();
        if (match_ident("if")) {
            expect_punct("(");
            ExprP cond = expression();
            expect_punct(")");
            StmtP then_s = statement();
            StmtP else_s;
            if (match_ident("else")) else_s = statement();
            auto s = std::make_shared<Stmt>();
            s->kind = Stmt::K::If;
            s->cond = std::move(cond);
            s->s1 = std::move(then_s);
            s->s2 = std::move(else_s);
            s->line = line;
            return s;
        }
        if (match_ident("while")) {
            expect_punct("(");
            ExprP cond = expression();
            expect_punct(")");
            auto s = std::make_shared<Stmt>();
            s->kind = Stmt::K::While;
            s->cond = std::move(cond);
            s->s1 = statement();
            s->line = line;
            return s;
        }
        if (match_ident("for")) {
            expect_punct("(");
            auto s = std::make_shared<Stmt>();
            s->kind = Stmt::K::For;
            s->line = line;
            if (!is_punct(";"))
                s->s1 = simple_statement();
            else
                advance();
            if (!is_punct(";")) s->cond = expression();
            expect_punct(";");
            if (!is_punct(")")) s->s2 = simple_no_semi();
            expect_punct(")");
            s->s3 = statement();
            return s;
        }
        if (match_ident("return")) {
            auto s = std::make_shared<Stmt>();
            s->kind = Stmt::K::Return;
            s->line = line;
            if (!is_punct(";")) s->expr = expression();
            expect_punct(";");
            return s;
        }
        if (match_ident("throw")) {
            expect_punct(";");
            auto s = std::make_shared<Stmt>();
            s->kind = Stmt::K::Throw;
            s->line = line;
            return s;
        }
        return simple_statement();
    }

    StmtP block() {
        int line = peek().line;
        expect_punct("{");
        auto s = std::make_shared<Stmt>();
        s->kind = Stmt::K::Block;
        s->line = line;
        while (!is_punct("}")) {
            if (at_end()) fail(line, "unterminated block");
            s->body.push_back(statement());
        }
        advance();
        return s;
    }

    // Declaration, assignment, op-assignment, increment or call, with the
    // trailing semicolon.
    StmtP simple_statement() {
        StmtP s = simple_no_semi();
        expect_punct(";");
        return s;
    }

    StmtP simple_no_semi() {
        int line = peek().line;
        bool decl = at_type_start();
        if (!decl && peek().kind == TokenKind::Identifier &&
            peek(1).kind == TokenKind::Identifier)
            decl = true;  // struct- or contract-typed local
        if (decl) {
            TypeRefP ty = type_ref();
            // Skip the data-location keywords; cells have one location here.
            while (is_ident("memory") || is_ident("storage")) advance();
            auto s = std::make_shared<Stmt>();
            s->kind = Stmt::K::VarDecl;
            s->decl_ty = std::move(ty);
            s->name = expect_ident("a variable name");
            s->line = line;
            if (match_punct("=")) s->init = expression();
            return s;
        }
        if (is_punct("++") || is_punct("--")) {
            std::string op = advance().text;
            auto s = std::make_shared<Stmt>();
            s->kind = Stmt::K::IncDec;
            s->op = std::move(op);
            s->target = unary();
            s->line = line;
            return s;
        }
        ExprP e = postfix();
        if (match_punct("=")) {
            auto s = std::make_shared<Stmt>();
            s->kind = Stmt::K::Assign;
            s->target = std::move(e);
            s->value = expression();
            s->line = line;
            return s;
        }
        for (const char* op : {"+=", "-=", "*=", "/=", "%="}) {
            if (is_punct(op)) {
                advance();
                auto s = std::make_shared<Stmt>();
                s->kind = Stmt::K::OpAssign;
                s->op = op;
                s->target = std::move(e);
                s->value = expression();
                s->line = line;
                return s;
            }
        }
        if (is_punct("++") || is_punct("--")) {
            std::string op = advance().text;
            auto s = std::make_shared<Stmt>();
            s->kind = Stmt::K::IncDec;
            s->op = std::move(op);
            s->target = std::move(e);
            s->line = line;
            return s;
        }
        auto s = std::make_shared<Stmt>();
        s->kind = Stmt::K::ExprStmt;
        s->expr = std::move(e);
        s->line = line;
        return s;
    }

    // ---- declarations

    ContractDecl contract_decl() {
        ContractDecl c;
        c.line = peek().line;
        advance();  // "contract"
        c.name = expect_ident("a contract name");
        if (match_ident("is")) {
            do {
                c.parents.push_back(expect_ident("a parent name"));
            } while (match_punct(","));
        }
        expect_punct("{");
        while (!is_punct("}")) {
            if (at_end()) fail(c.line, "unterminated contract");
            check_unsupported();
            if (is_ident("struct")) {
                c.order.emplace_back(ContractDecl::Item::Struct, c.structs.size());
                c.structs.push_back(struct_decl());
                continue;
            }
            if (is_ident("function")) {
                c.order.emplace_back(ContractDecl::Item::Function, c.functions.size());
                c.functions.push_back(function_decl());
                continue;
            }
            c.order.emplace_back(ContractDecl::Item::State, c.state.size());
            c.state.push_back(state_var());
        }
        advance();
        return c;
    }

    StructDecl struct_decl() {
        StructDecl s;
        s.line = peek().line;
        advance();  // struct
        s.name = expect_ident("a struct name");
        expect_punct("{");
        while (!is_punct("}")) {
            ParamDecl m;
            m.line = peek().line;
            m.ty = type_ref();
            m.name = expect_ident("a member name");
            expect_punct(";");
            s.members.push_back(std::move(m));
        }
        advance();
        return s;
    }

    StateVar state_var() {
        StateVar v;
        v.line = peek().line;
        v.ty = type_ref();
        while (true) {
            if (match_ident("public")) v.vis = ir::Visibility::Public;
            else if (match_ident("private")) v.vis = ir::Visibility::Private;
            else if (match_ident("internal")) v.vis = ir::Visibility::Internal;
            else if (match_ident("constant")) continue;
            else break;
        }
        v.name = expect_ident("a variable name");
        if (match_punct("=")) v.init = expression();
        expect_punct(";");
        return v;
    }

    FunDecl function_decl() {
        FunDecl f;
        f.line = peek().line;
        advance();  // function
        f.name = expect_ident("a function name");
        expect_punct("(");
        if (!is_punct(")")) {
            do {
                ParamDecl p;
                p.line = peek().line;
                p.ty = type_ref();
                while (is_ident("memory") || is_ident("storage")) advance();
                p.name = expect_ident("a parameter name");
                f.params.push_back(std::move(p));
            } while (match_punct(","));
        }
        expect_punct(")");
        while (true) {
            if (match_ident("public")) f.vis = ir::Visibility::Public;
            else if (match_ident("private")) f.vis = ir::Visibility::Private;
            else if (match_ident("internal")) f.vis = ir::Visibility::Internal;
            else if (match_ident("external")) f.vis = ir::Visibility::Public;
            else if (match_ident("payable") || match_ident("constant")) continue;
            else if (is_ident("returns")) {
                advance();
                expect_punct("(");
                f.ret = type_ref();
                if (peek().kind == TokenKind::Identifier) advance();  // named return
                expect_punct(")");
            } else {
                break;
            }
        }
        StmtP body = block();
        f.body = body->body;
        return f;
    }

    const std::vector<Token>& toks_;
    size_t pos_ = 0;
};

}  // namespace

ParseResult parse(const std::vector<Token>& tokens) {
    try {
        Parser p(tokens);
        return {p.unit(), std::nullopt};
    } catch (const Fail& f) {
        return {std::nullopt, FrontendError{f.kind, f.line, f.msg}};
    }
}

}  // namespace fspvm::frontend::ast
