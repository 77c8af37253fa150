#include <algorithm>
#include <sstream>

#include "fspvm/frontend.hpp"
#include "fspvm/symexec.hpp"
#include "symexec_internal.hpp"

namespace fspvm::symexec {

using germ::Value;
using ir::Int;

const char* sym_op_text(SymOp op) {
    switch (op) {
        case SymOp::Add: return "+";
        case SymOp::Sub: return "-";
        case SymOp::Mul: return "*";
        case SymOp::Div: return "/";
        case SymOp::Mod: return "%";
        case SymOp::Neg: return "neg";
        case SymOp::Eq: return "==";
        case SymOp::Ne: return "!=";
        case SymOp::Lt: return "<";
        case SymOp::Le: return "<=";
        case SymOp::Gt: return ">";
        case SymOp::Ge: return ">=";
        case SymOp::And: return "&&";
        case SymOp::Or: return "||";
        case SymOp::Not: return "!";
        case SymOp::Cast: return "cast";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// SymValue

SymValue SymValue::concrete(Value v) {
    SymValue s;
    s.kind_ = Kind::Concrete;
    s.value_ = std::make_shared<const Value>(std::move(v));
    return s;
}

SymValue SymValue::sym(std::string name, ir::LType ty) {
    SymValue s;
    s.kind_ = Kind::Sym;
    s.name_ = std::move(name);
    s.ty_ = std::move(ty);
    return s;
}

SymValue SymValue::app(SymOp op, std::vector<SymValue> args, ir::LType ty) {
    SymValue s;
    s.kind_ = Kind::App;
    s.op_ = op;
    s.kids_ = std::move(args);
    s.ty_ = std::move(ty);
    return s;
}

SymValue SymValue::struct_s(std::string layout, std::vector<SymValue> members) {
    SymValue s;
    s.kind_ = Kind::StructS;
    s.name_ = std::move(layout);
    s.kids_ = std::move(members);
    return s;
}

SymValue SymValue::array_s(ir::LType elem_ty, std::vector<SymValue> items) {
    SymValue s;
    s.kind_ = Kind::ArrayS;
    s.ty_ = std::move(elem_ty);
    s.kids_ = std::move(items);
    return s;
}

SymValue SymValue::map_s(ir::LType key_ty, ir::LType val_ty, SymValue dflt) {
    SymValue s;
    s.kind_ = Kind::MapS;
    s.ty_ = std::move(key_ty);
    s.ty2_ = std::move(val_ty);
    s.kids_.push_back(std::move(dflt));
    return s;
}

SymValue SymValue::with_member(size_t idx, SymValue v) const {
    SymValue s = *this;
    s.kids_[idx] = std::move(v);
    return s;
}

SymValue SymValue::with_item(size_t idx, SymValue v) const {
    SymValue s = *this;
    s.kids_[idx] = std::move(v);
    return s;
}

const SymValue& SymValue::map_get(const Value& key) const {
    for (size_t i = 0; i < map_entry_count(); ++i)
        if (map_entry_key(i).is_concrete() && map_entry_key(i).value() == key)
            return map_entry_val(i);
    return map_default();
}

SymValue SymValue::map_set(const Value& key, SymValue v) const {
    SymValue s = *this;
    for (size_t i = 0; i < map_entry_count(); ++i) {
        if (s.map_entry_key(i).is_concrete() && s.map_entry_key(i).value() == key) {
            if (!v.symbolic() && v == s.map_default()) {
                s.kids_.erase(s.kids_.begin() + 1 + 2 * i,
                              s.kids_.begin() + 3 + 2 * i);
            } else {
                s.kids_[2 + 2 * i] = std::move(v);
            }
            return s;
        }
    }
    if (!v.symbolic() && v == s.map_default()) return s;
    s.kids_.push_back(SymValue::concrete(key));
    s.kids_.push_back(std::move(v));
    return s;
}

bool SymValue::operator==(const SymValue& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
        case Kind::Concrete:
            return *value_ == *o.value_;
        case Kind::Sym:
            return name_ == o.name_ && ty_ == o.ty_;
        case Kind::App:
            if (op_ != o.op_ || !(ty_ == o.ty_)) return false;
            break;
        case Kind::StructS:
            if (name_ != o.name_) return false;
            break;
        case Kind::ArrayS:
            if (!(ty_ == o.ty_)) return false;
            break;
        case Kind::MapS:
            if (!(ty_ == o.ty_) || !(ty2_ == o.ty2_)) return false;
            break;
    }
    return kids_ == o.kids_;
}

bool SymValue::symbolic() const {
    switch (kind_) {
        case Kind::Concrete: return false;
        case Kind::Sym: return true;
        default:
            return std::any_of(kids_.begin(), kids_.end(),
                               [](const SymValue& k) { return k.symbolic(); });
    }
}

namespace {

// Operator precedence for the printer and the parser; higher binds tighter.
int precedence(SymOp op) {
    switch (op) {
        case SymOp::Or: return 1;
        case SymOp::And: return 2;
        case SymOp::Eq: case SymOp::Ne:
        case SymOp::Lt: case SymOp::Le:
        case SymOp::Gt: case SymOp::Ge: return 3;
        case SymOp::Add: case SymOp::Sub: return 4;
        case SymOp::Mul: case SymOp::Div: case SymOp::Mod: return 5;
        default: return 6;
    }
}

void print_term(const SymValue& t, std::ostringstream& out, int parent_prec) {
    switch (t.kind()) {
        case SymValue::Kind::Concrete:
            out << t.value().text();
            return;
        case SymValue::Kind::Sym:
            out << t.name();
            return;
        case SymValue::Kind::App: {
            if (t.op() == SymOp::Not) {
                out << "!";
                print_term(t.args()[0], out, 6);
                return;
            }
            if (t.op() == SymOp::Neg) {
                out << "-";
                print_term(t.args()[0], out, 6);
                return;
            }
            if (t.op() == SymOp::Cast) {
                out << "cast<" << t.ty().text() << ">(";
                print_term(t.args()[0], out, 0);
                out << ")";
                return;
            }
            int prec = precedence(t.op());
            if (prec <= parent_prec) out << "(";
            print_term(t.args()[0], out, prec);
            out << " " << sym_op_text(t.op()) << " ";
            print_term(t.args()[1], out, prec);
            if (prec <= parent_prec) out << ")";
            return;
        }
        case SymValue::Kind::StructS: {
            out << "{" << t.name();
            for (const auto& m : t.members()) {
                out << " ";
                print_term(m, out, 0);
            }
            out << "}";
            return;
        }
        case SymValue::Kind::ArrayS: {
            out << "[";
            for (size_t i = 0; i < t.items().size(); ++i) {
                if (i) out << " ";
                print_term(t.items()[i], out, 0);
            }
            out << "]";
            return;
        }
        case SymValue::Kind::MapS: {
            out << "{map";
            for (size_t i = 0; i < t.map_entry_count(); ++i) {
                out << " ";
                print_term(t.map_entry_key(i), out, 0);
                out << ":";
                print_term(t.map_entry_val(i), out, 0);
            }
            out << "}";
            return;
        }
    }
}

}  // namespace

std::string SymValue::text() const {
    std::ostringstream out;
    print_term(*this, out, 0);
    return out.str();
}

SymValue lift(const Value& v) { return SymValue::concrete(v); }

// ---------------------------------------------------------------------------
// PathCondition

namespace {

// c and !c in either orientation.
bool negation_of(const SymValue& a, const SymValue& b) {
    if (a.kind() == SymValue::Kind::App && a.op() == SymOp::Not &&
        a.args()[0] == b)
        return true;
    if (b.kind() == SymValue::Kind::App && b.op() == SymOp::Not &&
        b.args()[0] == a)
        return true;
    return false;
}

}  // namespace

void PathCondition::add(SymValue c) {
    if (c.is_concrete()) {
        if (c.value().kind() == Value::Kind::BoolV && !c.value().bool_val())
            false_ = true;
        return;  // true adds nothing
    }
    for (const auto& t : terms_) {
        if (t == c) return;
        if (negation_of(t, c)) {
            false_ = true;
            return;
        }
    }
    terms_.push_back(std::move(c));
}

std::string PathCondition::text() const {
    if (false_) return "false";
    if (terms_.empty()) return "true";
    std::ostringstream out;
    for (size_t i = 0; i < terms_.size(); ++i) {
        if (i) out << " && ";
        out << terms_[i].text();
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Concrete folding

namespace detail {

FoldResult fold_binop(SymOp op, const Value& a, const Value& b) {
    switch (op) {
        case SymOp::And:
        case SymOp::Or: {
            if (a.kind() != Value::Kind::BoolV || b.kind() != Value::Kind::BoolV)
                return {std::nullopt, false, "logical operand"};
            bool r = op == SymOp::And ? (a.bool_val() && b.bool_val())
                                      : (a.bool_val() || b.bool_val());
            return {Value::boolean(r)};
        }
        case SymOp::Eq:
            return {Value::boolean(a == b)};
        case SymOp::Ne:
            return {Value::boolean(!(a == b))};
        case SymOp::Lt:
        case SymOp::Le:
        case SymOp::Gt:
        case SymOp::Ge: {
            if (a.kind() != Value::Kind::IntV || b.kind() != Value::Kind::IntV ||
                a.int_bits() != b.int_bits() || a.int_sign() != b.int_sign())
                return {std::nullopt, false, "comparison operands"};
            bool sg = a.int_sign() == ir::Sign::Signed;
            Int x = sg ? a.int_signed() : a.int_mag();
            Int y = sg ? b.int_signed() : b.int_mag();
            bool r = false;
            switch (op) {
                case SymOp::Lt: r = x < y; break;
                case SymOp::Le: r = x <= y; break;
                case SymOp::Gt: r = x > y; break;
                default: r = x >= y; break;
            }
            return {Value::boolean(r)};
        }
        case SymOp::Add:
        case SymOp::Sub:
        case SymOp::Mul:
        case SymOp::Div:
        case SymOp::Mod: {
            if (a.kind() != Value::Kind::IntV || b.kind() != Value::Kind::IntV ||
                a.int_bits() != b.int_bits() || a.int_sign() != b.int_sign())
                return {std::nullopt, false, "arithmetic operands"};
            unsigned bits = a.int_bits();
            ir::Sign sign = a.int_sign();
            bool sg = sign == ir::Sign::Signed;
            Int x = sg ? a.int_signed() : a.int_mag();
            Int y = sg ? b.int_signed() : b.int_mag();
            Int exact;
            switch (op) {
                case SymOp::Add: exact = x + y; break;
                case SymOp::Sub: exact = x - y; break;
                case SymOp::Mul: exact = x * y; break;
                default:
                    if (y == 0) return {std::nullopt, false, "divide by zero"};
                    if (op == SymOp::Div) {
                        exact = x / y;
                    } else {
                        exact = x % y;
                    }
                    break;
            }
            Int wrapped = ir::wrap_int(exact, bits);
            Int canon = sg ? ir::to_signed(wrapped, bits) : wrapped;
            return {Value::integer(bits, sign, wrapped), canon != exact};
        }
        default:
            return {std::nullopt, false, "operator"};
    }
}

FoldResult fold_not(const Value& a) {
    if (a.kind() != Value::Kind::BoolV) return {std::nullopt, false, "not"};
    return {Value::boolean(!a.bool_val())};
}

FoldResult fold_neg(const Value& a) {
    if (a.kind() != Value::Kind::IntV) return {std::nullopt, false, "neg"};
    unsigned bits = a.int_bits();
    ir::Sign sign = a.int_sign();
    bool sg = sign == ir::Sign::Signed;
    Int operand = sg ? a.int_signed() : a.int_mag();
    Int exact = -operand;
    Int wrapped = ir::wrap_int(exact, bits);
    Int canon = sg ? ir::to_signed(wrapped, bits) : wrapped;
    return {Value::integer(bits, sign, wrapped), canon != exact};
}

FoldResult fold_cast(const ir::LType& target, const Value& a) {
    if (target.is_int() && a.kind() == Value::Kind::IntV) {
        Int sv = a.int_sign() == ir::Sign::Signed ? a.int_signed() : a.int_mag();
        return {Value::integer(target.bits(), target.sign(),
                               ir::wrap_int(sv, target.bits()))};
    }
    bool pass =
        (target.kind() == ir::LType::Kind::Bool && a.kind() == Value::Kind::BoolV) ||
        (target.kind() == ir::LType::Kind::String && a.kind() == Value::Kind::StringV) ||
        (target.kind() == ir::LType::Kind::Bytes && a.kind() == Value::Kind::BytesV) ||
        (target.kind() == ir::LType::Kind::Address && a.kind() == Value::Kind::BytesV);
    if (pass) return {a};
    return {std::nullopt, false, "cast"};
}

germ::Value default_of(const ir::LType& ty) {
    if (ty.is_bool()) return Value::boolean(false);
    if (ty.is_int()) return Value::integer(ty.bits(), ty.sign(), 0);
    return Value::undef();
}

namespace {

bool concrete_bool(const SymValue& t, bool b) {
    return t.is_concrete() && t.value().kind() == Value::Kind::BoolV &&
           t.value().bool_val() == b;
}

}  // namespace

SymValue subst(const SymValue& t, const std::map<std::string, Value>& model) {
    switch (t.kind()) {
        case SymValue::Kind::Concrete:
            return t;
        case SymValue::Kind::Sym: {
            auto it = model.find(t.name());
            return it != model.end() ? SymValue::concrete(it->second) : t;
        }
        case SymValue::Kind::App: {
            std::vector<SymValue> args;
            args.reserve(t.args().size());
            for (const auto& a : t.args()) args.push_back(subst(a, model));
            if (t.op() == SymOp::And || t.op() == SymOp::Or) {
                bool absorb = t.op() == SymOp::Or;  // true wins for ||
                if (concrete_bool(args[0], absorb) || concrete_bool(args[1], absorb))
                    return SymValue::concrete(Value::boolean(absorb));
                if (concrete_bool(args[0], !absorb)) return args[1];
                if (concrete_bool(args[1], !absorb)) return args[0];
            }
            bool all_concrete = std::all_of(
                args.begin(), args.end(),
                [](const SymValue& a) { return a.is_concrete(); });
            if (all_concrete) {
                FoldResult f;
                if (t.op() == SymOp::Not) {
                    f = fold_not(args[0].value());
                } else if (t.op() == SymOp::Neg) {
                    f = fold_neg(args[0].value());
                } else if (t.op() == SymOp::Cast) {
                    f = fold_cast(t.ty(), args[0].value());
                } else {
                    f = fold_binop(t.op(), args[0].value(), args[1].value());
                }
                if (f.v) return SymValue::concrete(*f.v);
            }
            return SymValue::app(t.op(), std::move(args), t.ty());
        }
        case SymValue::Kind::StructS: {
            SymValue s = t;
            for (size_t i = 0; i < t.members().size(); ++i)
                s = s.with_member(i, subst(t.members()[i], model));
            return s;
        }
        case SymValue::Kind::ArrayS: {
            SymValue s = t;
            for (size_t i = 0; i < t.items().size(); ++i)
                s = s.with_item(i, subst(t.items()[i], model));
            return s;
        }
        case SymValue::Kind::MapS: {
            // Positional rebuild keeps entry order; kid 0 is the default.
            SymValue s = t.with_item(0, subst(t.map_default(), model));
            for (size_t i = 0; i < t.map_entry_count(); ++i) {
                s = s.with_item(1 + 2 * i, subst(t.map_entry_key(i), model));
                s = s.with_item(2 + 2 * i, subst(t.map_entry_val(i), model));
            }
            return s;
        }
    }
    return t;
}

std::optional<Value> eval_term(const SymValue& t,
                               const std::map<std::string, Value>& model) {
    switch (t.kind()) {
        case SymValue::Kind::Concrete:
            return t.value();
        case SymValue::Kind::Sym: {
            auto it = model.find(t.name());
            return it != model.end() ? it->second : default_of(t.ty());
        }
        case SymValue::Kind::App: {
            if (t.op() == SymOp::Not) {
                auto a = detail::eval_term(t.args()[0], model);
                if (!a) return std::nullopt;
                auto r = fold_not(*a);
                return r.v;
            }
            if (t.op() == SymOp::Neg) {
                auto a = detail::eval_term(t.args()[0], model);
                if (!a) return std::nullopt;
                auto r = fold_neg(*a);
                return r.v;
            }
            if (t.op() == SymOp::Cast) {
                auto a = detail::eval_term(t.args()[0], model);
                if (!a) return std::nullopt;
                auto r = fold_cast(t.ty(), *a);
                return r.v;
            }
            // Logical operators short-circuit so a model can satisfy a
            // disjunction whose other arm would fault.
            if (t.op() == SymOp::And || t.op() == SymOp::Or) {
                auto a = detail::eval_term(t.args()[0], model);
                if (!a || a->kind() != Value::Kind::BoolV) return std::nullopt;
                bool stop = t.op() == SymOp::Or ? a->bool_val() : !a->bool_val();
                if (stop) return a;
                auto b = detail::eval_term(t.args()[1], model);
                if (!b || b->kind() != Value::Kind::BoolV) return std::nullopt;
                return b;
            }
            auto a = detail::eval_term(t.args()[0], model);
            auto b = detail::eval_term(t.args()[1], model);
            if (!a || !b) return std::nullopt;
            auto r = fold_binop(t.op(), *a, *b);
            return r.v;
        }
        default:
            return std::nullopt;  // compounds are not scalar terms
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Formula parsing

namespace {

// Recursive descent over the source lexer's tokens. Integer literals are
// polymorphic until an operator pairs them with a typed operand; a literal
// paired only with literals adopts the default width.
struct FormulaParser {
    const std::vector<frontend::Token>& toks;
    size_t at = 0;
    const std::function<std::optional<SymValue>(const std::string&)>& resolve;
    unsigned default_bits;
    std::string error;

    // Unresolved integer literal; widened when an operand fixes the type.
    struct Node {
        std::optional<SymValue> term;
        std::optional<Int> literal;
    };

    bool fail(const std::string& msg) {
        if (error.empty()) error = msg;
        return false;
    }

    const frontend::Token& peek() const { return toks[at]; }
    bool is_punct(const char* p) const {
        return peek().kind == frontend::TokenKind::Punct && peek().text == p;
    }
    bool eat(const char* p) {
        if (!is_punct(p)) return false;
        ++at;
        return true;
    }

    std::optional<ir::LType> type_of(const SymValue& t) {
        switch (t.kind()) {
            case SymValue::Kind::Sym:
            case SymValue::Kind::App:
                return t.ty();
            case SymValue::Kind::Concrete: {
                const Value& v = t.value();
                if (v.kind() == Value::Kind::BoolV) return ir::LType::boolean();
                if (v.kind() == Value::Kind::IntV)
                    return ir::LType::integer(v.int_bits(), v.int_sign());
                return std::nullopt;
            }
            default:
                return std::nullopt;
        }
    }

    std::optional<SymValue> finalize(Node n, const std::optional<ir::LType>& want) {
        if (n.term) return n.term;
        ir::LType ty = want && want->is_int()
                           ? *want
                           : ir::LType::integer(default_bits, ir::Sign::Unsigned);
        return SymValue::concrete(
            Value::integer(ty.bits(), ty.sign(), ir::wrap_int(*n.literal, ty.bits())));
    }

    // Pairs two parse results, resolving literal widths against each other.
    bool unify(Node& l, Node& r, SymValue& lv, SymValue& rv) {
        std::optional<ir::LType> lt = l.term ? type_of(*l.term) : std::nullopt;
        std::optional<ir::LType> rt = r.term ? type_of(*r.term) : std::nullopt;
        auto lf = finalize(std::move(l), rt);
        auto rf = finalize(std::move(r), lt);
        if (!lf || !rf) return fail("untypable operand");
        lv = std::move(*lf);
        rv = std::move(*rf);
        return true;
    }

    SymValue make_app(SymOp op, SymValue l, SymValue r, ir::LType ty) {
        if (l.is_concrete() && r.is_concrete()) {
            auto f = detail::fold_binop(op, l.value(), r.value());
            if (f.v) return SymValue::concrete(*f.v);
        }
        return SymValue::app(op, {std::move(l), std::move(r)}, std::move(ty));
    }

    std::optional<Node> primary() {
        const auto& t = peek();
        if (eat("(")) {
            auto inner = parse_or();
            if (!inner) return std::nullopt;
            if (!eat(")")) {
                fail("expected ')'");
                return std::nullopt;
            }
            return inner;
        }
        if (eat("!")) {
            auto inner = primary();
            if (!inner) return std::nullopt;
            auto v = finalize(std::move(*inner), ir::LType::boolean());
            if (!v) return std::nullopt;
            if (v->is_concrete()) {
                auto f = detail::fold_not(v->value());
                if (!f.v) {
                    fail("'!' needs a boolean");
                    return std::nullopt;
                }
                return Node{SymValue::concrete(*f.v), std::nullopt};
            }
            return Node{SymValue::app(SymOp::Not, {*v}, ir::LType::boolean()),
                        std::nullopt};
        }
        if (eat("-")) {
            auto inner = primary();
            if (!inner) return std::nullopt;
            if (inner->literal) return Node{std::nullopt, -*inner->literal};
            auto ty = type_of(*inner->term);
            if (!ty || !ty->is_int()) {
                fail("'-' needs an integer");
                return std::nullopt;
            }
            return Node{SymValue::app(SymOp::Neg, {*inner->term}, *ty),
                        std::nullopt};
        }
        if (t.kind == frontend::TokenKind::Number) {
            ++at;
            return Node{std::nullopt, Int(t.text)};  // handles 0x prefixes
        }
        if (t.kind == frontend::TokenKind::Identifier) {
            if (t.text == "true" || t.text == "false") {
                ++at;
                return Node{SymValue::concrete(Value::boolean(t.text == "true")),
                            std::nullopt};
            }
            std::string name = t.text;
            ++at;
            while (is_punct(".") &&
                   toks[at + 1].kind == frontend::TokenKind::Identifier) {
                name += "." + toks[at + 1].text;
                at += 2;
            }
            auto r = resolve(name);
            if (!r) {
                fail("unknown identifier '" + name + "'");
                return std::nullopt;
            }
            return Node{std::move(r), std::nullopt};
        }
        fail("unexpected token '" + t.text + "'");
        return std::nullopt;
    }

    std::optional<Node> parse_mul() {
        auto l = primary();
        if (!l) return std::nullopt;
        while (is_punct("*") || is_punct("/") || is_punct("%")) {
            SymOp op = is_punct("*") ? SymOp::Mul
                                     : is_punct("/") ? SymOp::Div : SymOp::Mod;
            ++at;
            auto r = primary();
            if (!r) return std::nullopt;
            if (l->literal && r->literal) {
                // Two bare literals fold exactly and stay width-polymorphic.
                if ((op == SymOp::Div || op == SymOp::Mod) && *r->literal == 0) {
                    fail("division by zero in constant");
                    return std::nullopt;
                }
                Int x = *l->literal, y = *r->literal;
                Int v;
                if (op == SymOp::Mul) {
                    v = x * y;
                } else if (op == SymOp::Div) {
                    v = x / y;
                } else {
                    v = x % y;
                }
                l = Node{std::nullopt, v};
                continue;
            }
            SymValue lv, rv;
            if (!unify(*l, *r, lv, rv)) return std::nullopt;
            auto ty = type_of(lv);
            if (!ty || !ty->is_int()) {
                fail("integer operands required");
                return std::nullopt;
            }
            l = Node{make_app(op, std::move(lv), std::move(rv), *ty), std::nullopt};
        }
        return l;
    }

    std::optional<Node> parse_add() {
        auto l = parse_mul();
        if (!l) return std::nullopt;
        while (is_punct("+") || is_punct("-")) {
            SymOp op = is_punct("+") ? SymOp::Add : SymOp::Sub;
            ++at;
            auto r = parse_mul();
            if (!r) return std::nullopt;
            if (l->literal && r->literal) {
                Int v;
                if (op == SymOp::Add) {
                    v = *l->literal + *r->literal;
                } else {
                    v = *l->literal - *r->literal;
                }
                l = Node{std::nullopt, v};
                continue;
            }
            SymValue lv, rv;
            if (!unify(*l, *r, lv, rv)) return std::nullopt;
            auto ty = type_of(lv);
            if (!ty || !ty->is_int()) {
                fail("integer operands required");
                return std::nullopt;
            }
            l = Node{make_app(op, std::move(lv), std::move(rv), *ty), std::nullopt};
        }
        return l;
    }

    std::optional<Node> parse_cmp() {
        auto l = parse_add();
        if (!l) return std::nullopt;
        static const std::pair<const char*, SymOp> ops[] = {
            {"==", SymOp::Eq}, {"!=", SymOp::Ne}, {"<=", SymOp::Le},
            {">=", SymOp::Ge}, {"<", SymOp::Lt},  {">", SymOp::Gt},
        };
        for (const auto& [text, op] : ops) {
            if (!is_punct(text)) continue;
            ++at;
            auto r = parse_add();
            if (!r) return std::nullopt;
            SymValue lv, rv;
            if (!unify(*l, *r, lv, rv)) return std::nullopt;
            return Node{make_app(op, std::move(lv), std::move(rv),
                                 ir::LType::boolean()),
                        std::nullopt};
        }
        return l;
    }

    std::optional<Node> parse_and() {
        auto l = parse_cmp();
        if (!l) return std::nullopt;
        while (eat("&&")) {
            auto r = parse_cmp();
            if (!r) return std::nullopt;
            auto lv = finalize(std::move(*l), ir::LType::boolean());
            auto rv = finalize(std::move(*r), ir::LType::boolean());
            if (!lv || !rv) return std::nullopt;
            l = Node{make_app(SymOp::And, std::move(*lv), std::move(*rv),
                              ir::LType::boolean()),
                     std::nullopt};
        }
        return l;
    }

    std::optional<Node> parse_or() {
        auto l = parse_and();
        if (!l) return std::nullopt;
        while (eat("||")) {
            auto r = parse_and();
            if (!r) return std::nullopt;
            auto lv = finalize(std::move(*l), ir::LType::boolean());
            auto rv = finalize(std::move(*r), ir::LType::boolean());
            if (!lv || !rv) return std::nullopt;
            l = Node{make_app(SymOp::Or, std::move(*lv), std::move(*rv),
                              ir::LType::boolean()),
                     std::nullopt};
        }
        return l;
    }
};

}  // namespace

std::optional<germ::Value> eval_term(const SymValue& t,
                                     const std::map<std::string, germ::Value>& model) {
    return detail::eval_term(t, model);
}

ParseFormulaResult parse_formula(
    const std::string& text,
    const std::function<std::optional<SymValue>(const std::string&)>& resolve,
    unsigned default_bits) {
    auto lexed = frontend::lex(text);
    if (lexed.error) return {std::nullopt, lexed.error->message};
    FormulaParser p{lexed.tokens, 0, resolve, default_bits, ""};
    auto n = p.parse_or();
    if (!n) return {std::nullopt, p.error};
    if (p.peek().kind != frontend::TokenKind::End)
        return {std::nullopt, "trailing input '" + p.peek().text + "'"};
    auto v = p.finalize(std::move(*n), std::nullopt);
    if (!v) return {std::nullopt, p.error.empty() ? "untypable formula" : p.error};
    return {std::move(*v), ""};
}

}  // namespace fspvm::symexec
