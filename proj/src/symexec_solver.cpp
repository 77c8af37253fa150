#include <algorithm>
#include <set>

#include "fspvm/symexec.hpp"
#include "symexec_internal.hpp"

namespace fspvm::symexec {

using germ::Value;
using ir::Int;

namespace {

// Enumeration ceilings. Beyond them the solver answers Unknown rather than
// spend unbounded time; the verifier treats Unknown conservatively.
constexpr size_t kMaxEnumBools = 12;
constexpr size_t kMaxGridInts = 3;
constexpr size_t kMaxCandidates = 24;
constexpr size_t kMaxDisjuncts = 64;
constexpr uint64_t kEvalBudget = 200000;

bool is_comparison(SymOp op) {
    switch (op) {
        case SymOp::Eq: case SymOp::Ne:
        case SymOp::Lt: case SymOp::Le:
        case SymOp::Gt: case SymOp::Ge:
            return true;
        default:
            return false;
    }
}

SymOp flip(SymOp op) {
    switch (op) {
        case SymOp::Eq: return SymOp::Ne;
        case SymOp::Ne: return SymOp::Eq;
        case SymOp::Lt: return SymOp::Ge;
        case SymOp::Le: return SymOp::Gt;
        case SymOp::Gt: return SymOp::Le;
        default: return SymOp::Lt;  // Ge
    }
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

bool int_operands(const SymValue& app) {
    auto lt = type_of(app.args()[0]);
    return lt && lt->is_int();
}

// ---------------------------------------------------------------------------
// Symbol discovery

struct SymbolSet {
    std::map<std::string, ir::LType> types;  // every declared or mentioned symbol
    std::vector<std::string> bools;          // occurring, sorted
    std::vector<std::string> ints;           // occurring, sorted
    bool conflict = false;
};

void collect_syms(const SymValue& t, SymbolSet& out,
                  std::set<std::string>& seen) {
    switch (t.kind()) {
        case SymValue::Kind::Concrete:
            return;
        case SymValue::Kind::Sym: {
            auto [it, fresh] = out.types.emplace(t.name(), t.ty());
            if (!fresh && it->second != t.ty()) out.conflict = true;
            seen.insert(t.name());
            return;
        }
        default:
            for (const auto& k : t.args()) collect_syms(k, out, seen);
            return;
    }
}

SymbolSet discover(const std::vector<SymValue>& conjuncts,
                   const std::map<std::string, ir::LType>& declared) {
    SymbolSet s;
    s.types = declared;
    std::set<std::string> seen;
    for (const auto& c : conjuncts) collect_syms(c, s, seen);
    for (const auto& name : seen) {
        const ir::LType& ty = s.types.at(name);
        if (ty.is_bool()) {
            s.bools.push_back(name);
        } else if (ty.is_int()) {
            s.ints.push_back(name);
        } else {
            s.conflict = true;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Linear forms over one bit width: sum of coef*sym + k, all modulo 2^bits.
// Exact for wrap-around Add/Sub/Mul/Neg, which is what makes equality atoms
// decidable without tracking overflow.

struct LinForm {
    std::map<std::string, Int> coef;  // nonzero, in [1, 2^bits)
    Int k = 0;                        // in [0, 2^bits)
    unsigned bits = 0;
};

void lin_add_term(LinForm& f, const std::string& name, const Int& c) {
    Int v = ir::wrap_int(f.coef.count(name) ? f.coef[name] + c : c, f.bits);
    if (v == 0) {
        f.coef.erase(name);
    } else {
        f.coef[name] = v;
    }
}

std::optional<LinForm> lin_of(const SymValue& t, unsigned bits);

std::optional<LinForm> lin_combine(const SymValue& a, const SymValue& b,
                                   unsigned bits, bool sub) {
    auto fa = lin_of(a, bits);
    auto fb = lin_of(b, bits);
    if (!fa || !fb) return std::nullopt;
    LinForm r = *fa;
    for (const auto& [name, c] : fb->coef)
        lin_add_term(r, name, sub ? ir::wrap_int(-c, bits) : c);
    Int k2;
    if (sub) {
        k2 = r.k - fb->k;
    } else {
        k2 = r.k + fb->k;
    }
    r.k = ir::wrap_int(k2, bits);
    return r;
}

std::optional<LinForm> lin_scale(const LinForm& f, const Int& c, unsigned bits) {
    LinForm r;
    r.bits = bits;
    r.k = ir::wrap_int(f.k * c, bits);
    for (const auto& [name, a] : f.coef) {
        Int v = ir::wrap_int(a * c, bits);
        if (v != 0) r.coef[name] = v;
    }
    return r;
}

std::optional<LinForm> lin_of(const SymValue& t, unsigned bits) {
    LinForm f;
    f.bits = bits;
    switch (t.kind()) {
        case SymValue::Kind::Concrete: {
            const Value& v = t.value();
            if (v.kind() != Value::Kind::IntV || v.int_bits() != bits)
                return std::nullopt;
            f.k = v.int_mag();
            return f;
        }
        case SymValue::Kind::Sym: {
            if (!t.ty().is_int() || t.ty().bits() != bits) return std::nullopt;
            f.coef[t.name()] = 1;
            return f;
        }
        case SymValue::Kind::App: {
            switch (t.op()) {
                case SymOp::Add:
                    return lin_combine(t.args()[0], t.args()[1], bits, false);
                case SymOp::Sub:
                    return lin_combine(t.args()[0], t.args()[1], bits, true);
                case SymOp::Neg: {
                    auto fa = lin_of(t.args()[0], bits);
                    if (!fa) return std::nullopt;
                    return lin_scale(*fa, ir::wrap_int(Int(-1), bits), bits);
                }
                case SymOp::Mul: {
                    auto fa = lin_of(t.args()[0], bits);
                    auto fb = lin_of(t.args()[1], bits);
                    if (!fa || !fb) return std::nullopt;
                    if (fa->coef.empty()) return lin_scale(*fb, fa->k, bits);
                    if (fb->coef.empty()) return lin_scale(*fa, fb->k, bits);
                    return std::nullopt;  // nonlinear
                }
                default:
                    return std::nullopt;  // Div, Mod, Cast stay opaque
            }
        }
        default:
            return std::nullopt;
    }
}

// Inverse of an odd residue modulo 2^bits by Newton iteration; precision
// doubles each step, nine steps cover 256 bits.
Int odd_inverse(const Int& a, unsigned bits) {
    Int x = 1;
    for (int i = 0; i < 9; ++i) x = ir::wrap_int(x * (2 - ir::wrap_int(a * x, bits)), bits);
    return x;
}

// ---------------------------------------------------------------------------
// Disjunctive normal form. Literals are positive comparison apps (negation
// is folded by flipping the operator), bare symbols, or opaque boolean terms
// wrapped in Not when negated.

using Disjunct = std::vector<SymValue>;
using Dnf = std::vector<Disjunct>;

std::optional<Dnf> dnf_cross(const Dnf& a, const Dnf& b) {
    if (a.size() * b.size() > kMaxDisjuncts) return std::nullopt;
    Dnf out;
    for (const auto& da : a) {
        for (const auto& db : b) {
            Disjunct d = da;
            d.insert(d.end(), db.begin(), db.end());
            out.push_back(std::move(d));
        }
    }
    return out;
}

std::optional<Dnf> dnf_union(Dnf a, const Dnf& b) {
    if (a.size() + b.size() > kMaxDisjuncts) return std::nullopt;
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::optional<Dnf> dnf_of(const SymValue& t, bool neg) {
    if (t.is_concrete()) {
        if (t.value().kind() != Value::Kind::BoolV) return std::nullopt;
        bool v = t.value().bool_val() != neg;
        return v ? Dnf{{}} : Dnf{};
    }
    if (t.kind() == SymValue::Kind::Sym) {
        SymValue lit = neg ? SymValue::app(SymOp::Not, {t}, ir::LType::boolean()) : t;
        return Dnf{{lit}};
    }
    if (t.kind() != SymValue::Kind::App) return std::nullopt;

    switch (t.op()) {
        case SymOp::Not:
            return dnf_of(t.args()[0], !neg);
        case SymOp::And:
        case SymOp::Or: {
            bool cross = (t.op() == SymOp::And) != neg;
            auto a = dnf_of(t.args()[0], neg);
            auto b = dnf_of(t.args()[1], neg);
            if (!a || !b) return std::nullopt;
            return cross ? dnf_cross(*a, *b) : dnf_union(std::move(*a), *b);
        }
        case SymOp::Eq:
        case SymOp::Ne: {
            auto lt = type_of(t.args()[0]);
            if (lt && lt->is_bool()) {
                // Boolean (in)equality expands as a biconditional.
                bool want_eq = (t.op() == SymOp::Eq) != neg;
                auto a0 = dnf_of(t.args()[0], false);
                auto a1 = dnf_of(t.args()[0], true);
                auto b0 = dnf_of(t.args()[1], false);
                auto b1 = dnf_of(t.args()[1], true);
                if (!a0 || !a1 || !b0 || !b1) return std::nullopt;
                auto both = want_eq ? dnf_cross(*a0, *b0) : dnf_cross(*a0, *b1);
                auto neither = want_eq ? dnf_cross(*a1, *b1) : dnf_cross(*a1, *b0);
                if (!both || !neither) return std::nullopt;
                return dnf_union(std::move(*both), *neither);
            }
            [[fallthrough]];
        }
        case SymOp::Lt:
        case SymOp::Le:
        case SymOp::Gt:
        case SymOp::Ge: {
            SymOp op = neg ? flip(t.op()) : t.op();
            return Dnf{{SymValue::app(op, t.args(), ir::LType::boolean())}};
        }
        default: {
            // Opaque boolean term (casts and the like).
            SymValue lit = neg ? SymValue::app(SymOp::Not, {t}, ir::LType::boolean()) : t;
            return Dnf{{lit}};
        }
    }
}

// ---------------------------------------------------------------------------
// Single-disjunct refutation by interval and congruence reasoning per symbol.
// A demonstrated contradiction among the understood atoms refutes the whole
// disjunct; opaque atoms can never help refute, only block.

struct Band {
    Int lo, hi;                 // comparison domain for the symbol's type
    std::optional<Int> point;   // required value
    std::vector<Int> anti;      // excluded values
};

Int domain_of(const Int& mag, unsigned bits, ir::Sign sign) {
    return sign == ir::Sign::Signed ? ir::to_signed(mag, bits) : mag;
}

// True when the constraints gathered for one symbol cannot all hold.
bool band_contradicts(const Band& b) {
    Int lo = b.lo, hi = b.hi;
    if (b.point) {
        if (*b.point < lo || *b.point > hi) return true;
        for (const auto& a : b.anti)
            if (a == *b.point) return true;
        return false;
    }
    if (lo > hi) return true;
    if (lo == hi) {
        for (const auto& a : b.anti)
            if (a == lo) return true;
    }
    return false;
}

struct Refuter {
    const std::map<std::string, ir::LType>& types;
    std::map<std::string, Band> bands;
    bool contradiction = false;

    Band& band_for(const std::string& name) {
        auto it = bands.find(name);
        if (it != bands.end()) return it->second;
        const ir::LType& ty = types.at(name);
        Band b;
        if (ty.sign() == ir::Sign::Signed) {
            b.lo = -(Int(1) << (ty.bits() - 1));
            b.hi = (Int(1) << (ty.bits() - 1)) - 1;
        } else {
            b.lo = 0;
            b.hi = (Int(1) << ty.bits()) - 1;
        }
        return bands.emplace(name, std::move(b)).first->second;
    }

    void require_point(const std::string& name, const Int& dv) {
        Band& b = band_for(name);
        if (b.point && *b.point != dv) {
            contradiction = true;
            return;
        }
        b.point = dv;
    }

    void exclude_point(const std::string& name, const Int& dv) {
        band_for(name).anti.push_back(dv);
    }

    void bound(const std::string& name, SymOp op, const Int& c) {
        Band& b = band_for(name);
        switch (op) {
            case SymOp::Lt: b.hi = std::min(b.hi, Int(c - 1)); break;
            case SymOp::Le: b.hi = std::min(b.hi, c); break;
            case SymOp::Gt: b.lo = std::max(b.lo, Int(c + 1)); break;
            default: b.lo = std::max(b.lo, c); break;  // Ge
        }
    }

    // Returns true when the atom was understood (decided or banded), false
    // when it stays opaque.
    bool absorb(const SymValue& lit, bool& decided_false) {
        decided_false = false;
        if (lit.kind() != SymValue::Kind::App || !is_comparison(lit.op()) ||
            !int_operands(lit))
            return false;
        auto lt = type_of(lit.args()[0]);
        auto rt = type_of(lit.args()[1]);
        if (!lt || !rt || !(*lt == *rt)) return false;
        unsigned bits = lt->bits();
        ir::Sign sign = lt->sign();

        if (lit.op() == SymOp::Eq || lit.op() == SymOp::Ne) {
            auto form = lin_combine(lit.args()[0], lit.args()[1], bits, true);
            if (!form) return false;
            bool eq = lit.op() == SymOp::Eq;
            Int rhs = ir::wrap_int(-form->k, bits);  // sum coef*sym == rhs
            if (form->coef.empty()) {
                bool holds = eq ? (form->k == 0) : (form->k != 0);
                decided_false = !holds;
                return true;
            }
            if (form->coef.size() > 1) return false;
            const auto& [name, a] = *form->coef.begin();
            if ((a & 1) != 0) {
                Int x0 = ir::wrap_int(odd_inverse(a, bits) * rhs, bits);
                Int dv = domain_of(x0, bits, sign);
                if (eq) {
                    require_point(name, dv);
                } else {
                    exclude_point(name, dv);
                }
                return true;
            }
            // Even coefficient: solvable only when gcd(a, 2^bits) divides rhs.
            Int m = Int(1) << bits;
            Int g = gcd(a, m);
            bool solvable = rhs % g == 0;
            if (!solvable) {
                decided_false = eq;  // Eq impossible, Ne always true
                return true;
            }
            return false;  // solutions exist but are not a single point
        }

        // Order atoms must be a bare symbol against a constant; wrap-around
        // breaks order under arithmetic rewriting.
        const SymValue& l = lit.args()[0];
        const SymValue& r = lit.args()[1];
        if (l.kind() == SymValue::Kind::Sym && r.is_concrete()) {
            bound(l.name(), lit.op(),
                  domain_of(r.value().int_mag(), bits, sign));
            return true;
        }
        if (r.kind() == SymValue::Kind::Sym && l.is_concrete()) {
            // c op x mirrors to x op' c.
            SymOp m = lit.op() == SymOp::Lt   ? SymOp::Gt
                      : lit.op() == SymOp::Le ? SymOp::Ge
                      : lit.op() == SymOp::Gt ? SymOp::Lt
                                              : SymOp::Le;
            bound(r.name(), m, domain_of(l.value().int_mag(), bits, sign));
            return true;
        }
        return false;
    }
};

bool refute_disjunct(const Disjunct& d,
                     const std::map<std::string, ir::LType>& types) {
    Refuter ref{types};
    std::vector<const SymValue*> opaque;
    for (const auto& lit : d) {
        if (lit.is_concrete()) {
            if (lit.value().kind() == Value::Kind::BoolV && !lit.value().bool_val())
                return true;
            continue;
        }
        bool decided_false = false;
        if (ref.absorb(lit, decided_false)) {
            if (decided_false) return true;
            if (ref.contradiction) return true;
        } else {
            opaque.push_back(&lit);
        }
    }
    for (const auto& [name, band] : ref.bands)
        if (band_contradicts(band)) return true;
    // A literal and its structural negation cannot both hold, whatever the
    // atom means.
    for (size_t i = 0; i < opaque.size(); ++i) {
        for (size_t j = 0; j < opaque.size(); ++j) {
            const SymValue& a = *opaque[i];
            const SymValue& b = *opaque[j];
            if (a.kind() == SymValue::Kind::App && a.op() == SymOp::Not &&
                a.args()[0] == b)
                return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Candidate harvesting for the satisfiability grid. Every comparison atom
// involving exactly one integer symbol linearly contributes the crossing
// point of its boundary plus both neighbors.

void harvest_atoms(const SymValue& t,
                   std::map<std::string, std::set<Int>>& out) {
    if (t.kind() != SymValue::Kind::App) return;
    if (is_comparison(t.op()) && int_operands(t)) {
        auto lt = type_of(t.args()[0]);
        auto rt = type_of(t.args()[1]);
        if (lt && rt && *lt == *rt && lt->is_int()) {
            unsigned bits = lt->bits();
            auto form = lin_combine(t.args()[0], t.args()[1], bits, true);
            if (form && form->coef.size() == 1) {
                const auto& [name, a] = *form->coef.begin();
                if ((a & 1) != 0) {
                    Int rhs = ir::wrap_int(-form->k, bits);
                    Int x0 = ir::wrap_int(odd_inverse(a, bits) * rhs, bits);
                    auto it = out.find(name);
                    if (it != out.end()) {
                        it->second.insert(x0);
                        it->second.insert(ir::wrap_int(x0 - 1, bits));
                        it->second.insert(ir::wrap_int(x0 + 1, bits));
                    }
                }
            }
        }
        // Comparisons over booleans carry boolean subterms worth walking.
        if (lt && lt->is_bool())
            for (const auto& k : t.args()) harvest_atoms(k, out);
        return;
    }
    for (const auto& k : t.args()) harvest_atoms(k, out);
}

}  // namespace

// ---------------------------------------------------------------------------

SolveResult solve(const std::vector<SymValue>& conjuncts,
                  const std::map<std::string, ir::LType>& symbols) {
    // Concrete conjuncts decide themselves.
    std::vector<SymValue> live;
    for (const auto& c : conjuncts) {
        if (c.is_concrete()) {
            if (c.value().kind() != Value::Kind::BoolV) return {};
            if (!c.value().bool_val()) return {SolveResult::Kind::Unsat, {}};
            continue;
        }
        live.push_back(c);
    }

    SymbolSet syms = discover(live, symbols);
    if (syms.conflict) return {};

    std::map<std::string, Value> defaults;
    for (const auto& [name, ty] : syms.types)
        defaults[name] = detail::default_of(ty);

    if (live.empty()) return {SolveResult::Kind::Sat, defaults};

    // Candidate grid per occurring integer symbol.
    std::map<std::string, std::set<Int>> cand;
    bool grid_ints = syms.ints.size() <= kMaxGridInts;
    for (const auto& name : syms.ints) {
        const ir::LType& ty = syms.types.at(name);
        Int top = (Int(1) << ty.bits()) - 1;
        std::set<Int>& s = cand[name];
        s.insert(0);
        s.insert(1);
        s.insert(2);
        s.insert(top);
        s.insert(top - 1);
    }
    if (grid_ints)
        for (const auto& c : live) harvest_atoms(c, cand);

    std::vector<std::vector<Int>> grid;  // ascending magnitudes per int symbol
    for (const auto& name : syms.ints) {
        std::vector<Int> v(cand[name].begin(), cand[name].end());
        if (!grid_ints) v = {Int(0)};
        if (v.size() > kMaxCandidates) v.resize(kMaxCandidates);
        grid.push_back(std::move(v));
    }

    size_t nb = syms.bools.size();
    bool full_bools = nb <= kMaxEnumBools;
    uint64_t assignments = full_bools ? (uint64_t{1} << nb) : 1;

    // Satisfiability: first hit in false-first boolean order crossed with the
    // ascending integer grid is the reported model.
    uint64_t evals = 0;
    bool budget_hit = false;
    for (uint64_t a = 0; a < assignments && !budget_hit; ++a) {
        std::map<std::string, Value> model = defaults;
        for (size_t j = 0; j < nb; ++j)
            model[syms.bools[j]] =
                Value::boolean(((a >> (nb - 1 - j)) & 1) != 0);

        std::vector<size_t> idx(grid.size(), 0);
        while (true) {
            for (size_t j = 0; j < grid.size(); ++j) {
                const ir::LType& ty = syms.types.at(syms.ints[j]);
                model[syms.ints[j]] =
                    Value::integer(ty.bits(), ty.sign(), grid[j][idx[j]]);
            }
            if (++evals > kEvalBudget) {
                budget_hit = true;
                break;
            }
            bool ok = true;
            for (const auto& c : live) {
                auto v = detail::eval_term(c, model);
                if (!v || v->kind() != Value::Kind::BoolV || !v->bool_val()) {
                    ok = false;
                    break;
                }
            }
            if (ok) return {SolveResult::Kind::Sat, model};

            // Odometer, last symbol fastest; no advance means the grid is
            // exhausted (or empty) for this assignment.
            bool advanced = false;
            for (size_t j = grid.size(); j-- > 0;) {
                if (++idx[j] < grid[j].size()) {
                    advanced = true;
                    break;
                }
                idx[j] = 0;
            }
            if (!advanced) break;
        }
    }

    // Unsatisfiability: every boolean assignment must be refuted in every
    // disjunct of its normal form.
    if (!full_bools) return {};
    for (uint64_t a = 0; a < assignments; ++a) {
        std::map<std::string, Value> bools_only;
        for (size_t j = 0; j < nb; ++j)
            bools_only[syms.bools[j]] =
                Value::boolean(((a >> (nb - 1 - j)) & 1) != 0);

        Dnf whole{{}};
        bool refuted = false;
        bool inconclusive = false;
        for (const auto& c : live) {
            SymValue r = detail::subst(c, bools_only);
            if (r.is_concrete()) {
                if (r.value().kind() != Value::Kind::BoolV) {
                    inconclusive = true;
                    break;
                }
                if (!r.value().bool_val()) {
                    refuted = true;
                    break;
                }
                continue;
            }
            auto d = dnf_of(r, false);
            if (!d) {
                inconclusive = true;
                break;
            }
            auto crossed = dnf_cross(whole, *d);
            if (!crossed) {
                inconclusive = true;
                break;
            }
            whole = std::move(*crossed);
        }
        if (refuted) continue;
        if (inconclusive) return {};
        bool all_refuted = true;
        for (const auto& d : whole) {
            if (!refute_disjunct(d, syms.types)) {
                all_refuted = false;
                break;
            }
        }
        if (!all_refuted) return {};
    }
    return {SolveResult::Kind::Unsat, {}};
}

SolveResult solve(const PathCondition& pc,
                  const std::map<std::string, ir::LType>& symbols) {
    if (pc.trivially_false()) return {SolveResult::Kind::Unsat, {}};
    return solve(pc.terms(), symbols);
}

}  // namespace fspvm::symexec
