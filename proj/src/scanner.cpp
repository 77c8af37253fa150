// The matchers are dominator-based over the structured statement tree: a
// guard is the condition of an enclosing If/While/For arm, or the condition
// of an earlier same-block If that throws on one side (every continuation
// runs under its other side). Relevance is textual: a guard counts when one
// side of a comparison inside it prints exactly like the watched operand.
#include <map>
#include <set>

#include "fspvm/frontend.hpp"
#include "fspvm/germ.hpp"
#include "fspvm/scanner.hpp"

namespace fspvm::scanner {

namespace {

const char* kFeatureNames[] = {"unchecked_send", "integer_overflow",
                               "divide_by_zero", "stack_overflow"};

bool is_send_builtin(const std::string& name) {
    return name == germ::kSendBuiltin || name == germ::kCallBuiltin ||
           name == germ::kTransferBuiltin;
}

bool mentions_var(const ir::ExprPtr& e, const std::string& name) {
    if (!e) return false;
    if ((e->kind == ir::Expr::Kind::Var || e->kind == ir::Expr::Kind::Par) &&
        e->name == name)
        return true;
    if (mentions_var(e->a, name) || mentions_var(e->b, name)) return true;
    for (const auto& [nm, sub] : e->members)
        if (mentions_var(sub, name)) return true;
    return false;
}

bool stmt_mentions_var(const ir::StmtPtr& s, const std::string& name) {
    if (!s) return false;
    if (mentions_var(s->e1, name) || mentions_var(s->e2, name)) return true;
    for (const auto& a : s->args)
        if (mentions_var(a, name)) return true;
    if (stmt_mentions_var(s->s1, name) || stmt_mentions_var(s->s2, name) ||
        stmt_mentions_var(s->s3, name))
        return true;
    for (const auto& c : s->stmts)
        if (stmt_mentions_var(c, name)) return true;
    return false;
}

bool is_comparison(ir::BinOp op) {
    return op == ir::BinOp::Eq || op == ir::BinOp::Ne || op == ir::BinOp::Lt ||
           op == ir::BinOp::Le || op == ir::BinOp::Gt || op == ir::BinOp::Ge;
}

bool is_ordering(ir::BinOp op) {
    return op == ir::BinOp::Lt || op == ir::BinOp::Le || op == ir::BinOp::Gt ||
           op == ir::BinOp::Ge;
}

// A guard covers an operand when some comparison inside it has a side that
// prints exactly like that operand.
void collect_compared_texts(const ir::ExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == ir::Expr::Kind::Binop && is_comparison(e->bop)) {
        if (e->a) out.insert(frontend::pretty_expr(e->a));
        if (e->b) out.insert(frontend::pretty_expr(e->b));
    }
    collect_compared_texts(e->a, out);
    collect_compared_texts(e->b, out);
    for (const auto& [nm, sub] : e->members) collect_compared_texts(sub, out);
}

bool has_ordering_cmp(const ir::ExprPtr& e) {
    if (!e) return false;
    if (e->kind == ir::Expr::Kind::Binop && is_ordering(e->bop) && e->a &&
        e->a->out_ty.is_int())
        return true;
    if (has_ordering_cmp(e->a) || has_ordering_cmp(e->b)) return true;
    for (const auto& [nm, sub] : e->members)
        if (has_ordering_cmp(sub)) return true;
    return false;
}

// The Throw may sit directly in a branch or alone inside its Seq.
bool branch_throws(const ir::StmtPtr& s) {
    if (!s) return false;
    if (s->kind == ir::Statement::Kind::Throw) return true;
    if (s->kind != ir::Statement::Kind::Seq) return false;
    const ir::StmtPtr* only = nullptr;
    for (const auto& c : s->stmts) {
        if (!c || c->kind == ir::Statement::Kind::Nil) continue;
        if (only) return false;
        only = &c;
    }
    return only && (*only)->kind == ir::Statement::Kind::Throw;
}

struct Walk {
    Feature feature;
    std::vector<Finding>* out = nullptr;
    // Cyclic functions and guard state for stack_overflow.
    const std::set<std::string>* cyclic = nullptr;
    std::string cur_fun;

    std::vector<ir::ExprPtr> guards;

    bool guard_covers(const ir::ExprPtr& operand) const {
        std::string text = frontend::pretty_expr(operand);
        for (const auto& g : guards) {
            std::set<std::string> sides;
            collect_compared_texts(g, sides);
            if (sides.count(text)) return true;
        }
        return false;
    }

    bool any_counter_guard() const {
        for (const auto& g : guards)
            if (has_ordering_cmp(g)) return true;
        return false;
    }

    void add(const ir::StmtPtr& s, std::string note) {
        out->push_back({feature, s, s->line, std::move(note)});
    }

    // ---- per-expression matchers

    bool literal_int(const ir::ExprPtr& e, ir::Int& v) const {
        if (!e || e->kind != ir::Expr::Kind::Const || !e->lit.ty.is_int())
            return false;
        v = e->lit.i;
        return true;
    }

    void match_arith(const ir::StmtPtr& s, const ir::ExprPtr& e, bool& hit) {
        if (!e || hit) return;
        if (e->kind == ir::Expr::Kind::Binop &&
            (e->bop == ir::BinOp::Add || e->bop == ir::BinOp::Sub ||
             e->bop == ir::BinOp::Mul) &&
            e->out_ty.is_int()) {
            ir::Int va, vb;
            bool la = literal_int(e->a, va);
            bool lb = literal_int(e->b, vb);
            bool safe = la && lb;  // constant folding, no runtime wrap
            if (!safe && e->bop == ir::BinOp::Mul)
                safe = (la && (va == 0 || va == 1)) || (lb && (vb == 0 || vb == 1));
            if (!safe && (e->bop == ir::BinOp::Add || e->bop == ir::BinOp::Sub))
                safe = (la && va == 0) || (lb && vb == 0);
            if (!safe) {
                bool guarded = (!la && guard_covers(e->a)) || (!lb && guard_covers(e->b));
                if (!guarded) {
                    add(s, std::string(ir::binop_text(e->bop)) + " may wrap");
                    hit = true;
                    return;
                }
            }
        }
        match_arith(s, e->a, hit);
        match_arith(s, e->b, hit);
        for (const auto& [nm, sub] : e->members) match_arith(s, sub, hit);
    }

    void match_div(const ir::StmtPtr& s, const ir::ExprPtr& e, bool& hit) {
        if (!e || hit) return;
        if (e->kind == ir::Expr::Kind::Binop &&
            (e->bop == ir::BinOp::Div || e->bop == ir::BinOp::Mod)) {
            ir::Int vb;
            if (literal_int(e->b, vb)) {
                if (vb == 0) {
                    add(s, "literal zero denominator");
                    hit = true;
                    return;
                }
            } else if (!guard_covers(e->b)) {
                add(s, "denominator may be zero");
                hit = true;
                return;
            }
        }
        match_div(s, e->a, hit);
        match_div(s, e->b, hit);
        for (const auto& [nm, sub] : e->members) match_div(s, sub, hit);
    }

    void match_exprs(const ir::StmtPtr& s) {
        bool hit = false;
        auto each = [&](const ir::ExprPtr& e) {
            if (feature == Feature::IntegerOverflow) match_arith(s, e, hit);
            if (feature == Feature::DivideByZero) match_div(s, e, hit);
        };
        each(s->e1);
        each(s->e2);
        for (const auto& a : s->args) each(a);
    }

    // ---- statement walk

    void block(const ir::Program& stmts) {
        std::vector<ir::ExprPtr> entry_guards = guards;
        for (size_t i = 0; i < stmts.size(); ++i) {
            const ir::StmtPtr& s = stmts[i];
            if (!s) continue;
            visit(s, &stmts, i);
            // An if-throw screens everything after it in this block.
            if (s->kind == ir::Statement::Kind::If &&
                (branch_throws(s->s1) || branch_throws(s->s2)))
                guards.push_back(s->e1);
        }
        guards = std::move(entry_guards);
    }

    // True when some later statement in the block reads the send-result cell
    // before another send overwrites it.
    static bool result_consumed(const ir::Program& stmts, size_t after) {
        for (size_t j = after + 1; j < stmts.size(); ++j) {
            const ir::StmtPtr& s = stmts[j];
            if (!s) continue;
            if (s->kind == ir::Statement::Kind::FunCall && s->e1 &&
                is_send_builtin(s->e1->name))
                return false;
            if (stmt_mentions_var(s, germ::kSendResultVar)) return true;
        }
        return false;
    }

    void visit(const ir::StmtPtr& s, const ir::Program* siblings, size_t idx) {
        using K = ir::Statement::Kind;
        switch (s->kind) {
            case K::Nil:
            case K::StructDecl:
            case K::Throw:
                return;
            case K::Seq:
                block(s->stmts);
                return;
            case K::Contract:
                block(s->stmts);
                return;
            case K::Fun: {
                std::string saved = cur_fun;
                std::vector<ir::ExprPtr> outer = std::move(guards);
                guards.clear();
                cur_fun = s->e1 ? s->e1->name : "";
                block(s->stmts);
                guards = std::move(outer);
                cur_fun = std::move(saved);
                return;
            }
            case K::Var:
                return;
            case K::Assign:
            case K::Return:
                match_exprs(s);
                return;
            case K::If: {
                match_exprs(s);
                guards.push_back(s->e1);
                if (s->s1) visit_branch(s->s1);
                if (s->s2) visit_branch(s->s2);
                guards.pop_back();
                return;
            }
            case K::While: {
                match_exprs(s);
                guards.push_back(s->e1);
                if (s->s1) visit_branch(s->s1);
                guards.pop_back();
                return;
            }
            case K::For: {
                if (s->s1) visit_branch(s->s1);
                match_exprs(s);
                guards.push_back(s->e1);
                if (s->s2) visit_branch(s->s2);
                if (s->s3) visit_branch(s->s3);
                guards.pop_back();
                return;
            }
            case K::FunCall: {
                match_exprs(s);
                const std::string& callee = s->e1 ? s->e1->name : "";
                if (feature == Feature::UncheckedSend && is_send_builtin(callee)) {
                    bool consumed =
                        siblings && result_consumed(*siblings, idx);
                    if (!consumed) add(s, "send result unchecked");
                }
                if (feature == Feature::StackOverflow && cyclic &&
                    cyclic->count(cur_fun) && cyclic->count(callee)) {
                    if (!any_counter_guard())
                        add(s, "recursive call without a bound");
                }
                return;
            }
        }
    }

    // Branches walk as singleton blocks so nested sends see their siblings.
    void visit_branch(const ir::StmtPtr& s) {
        if (!s) return;
        if (s->kind == ir::Statement::Kind::Seq) {
            block(s->stmts);
            return;
        }
        ir::Program one{s};
        block(one);
    }
};

// Call graph over user functions; a function is cyclic when it can reach
// itself. Builtin send-family callees are not user calls.
std::set<std::string> cyclic_functions(const ir::Program& prog) {
    std::map<std::string, std::set<std::string>> edges;
    std::vector<std::pair<std::string, const ir::StmtPtr*>> funs;

    std::function<void(const ir::StmtPtr&, const std::string&)> walk =
        [&](const ir::StmtPtr& s, const std::string& fun) {
            if (!s) return;
            if (s->kind == ir::Statement::Kind::Fun) {
                std::string name = s->e1 ? s->e1->name : "";
                edges.emplace(name, std::set<std::string>{});
                for (const auto& c : s->stmts) walk(c, name);
                return;
            }
            if (s->kind == ir::Statement::Kind::FunCall && !fun.empty() && s->e1 &&
                !is_send_builtin(s->e1->name))
                edges[fun].insert(s->e1->name);
            for (const auto& c : s->stmts) walk(c, fun);
            walk(s->s1, fun);
            walk(s->s2, fun);
            walk(s->s3, fun);
        };
    for (const auto& s : prog) walk(s, "");

    std::set<std::string> cyclic;
    for (const auto& [start, _] : edges) {
        std::set<std::string> seen;
        std::vector<std::string> stack(edges[start].begin(), edges[start].end());
        while (!stack.empty()) {
            std::string cur = std::move(stack.back());
            stack.pop_back();
            if (cur == start) {
                cyclic.insert(start);
                break;
            }
            if (!seen.insert(cur).second) continue;
            auto it = edges.find(cur);
            if (it == edges.end()) continue;
            for (const auto& nxt : it->second) stack.push_back(nxt);
        }
    }
    return cyclic;
}

}  // namespace

const char* feature_name(Feature f) { return kFeatureNames[size_t(f)]; }

std::optional<Feature> feature_by_name(const std::string& name) {
    for (size_t i = 0; i < kAllFeatures.size(); ++i)
        if (name == kFeatureNames[i]) return kAllFeatures[i];
    return std::nullopt;
}

std::vector<Finding> scan_feature(const ir::Program& prog, Feature f) {
    std::vector<Finding> out;
    std::set<std::string> cyclic;
    Walk w;
    w.feature = f;
    w.out = &out;
    if (f == Feature::StackOverflow) {
        cyclic = cyclic_functions(prog);
        w.cyclic = &cyclic;
    }
    w.block(prog);
    return out;
}

ir::StmtPtr scan(const ir::Program& prog, Feature f) {
    auto findings = scan_feature(prog, f);
    return findings.empty() ? nullptr : findings.front().stmt;
}

ScanReport scan_all(const ir::Program& prog) {
    ScanReport report;
    for (Feature f : kAllFeatures) {
        auto findings = scan_feature(prog, f);
        report.findings.insert(report.findings.end(), findings.begin(),
                               findings.end());
    }
    return report;
}

}  // namespace fspvm::scanner
