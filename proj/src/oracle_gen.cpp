#include <algorithm>
#include <atomic>
#include <random>
#include <thread>
#include <utility>

#include "fspvm/frontend.hpp"
#include "fspvm/oracle.hpp"

namespace fspvm::oracle {

using ir::Expr;
using ir::ExprPtr;
using ir::LType;
using ir::Statement;
using ir::StmtPtr;

namespace {

// Fixed declaration set every generated program opens with. Statements then
// draw from these names, so any generated expression can be typed without
// tracking scopes.
const LType kWide = LType::integer(64, ir::Sign::Unsigned);
const LType kByte = LType::integer(8, ir::Sign::Unsigned);
const LType kSByte = LType::integer(8, ir::Sign::Signed);

struct Gen {
    std::mt19937_64 rng;
    int budget;  // statements left to spend, Seq wrappers free
    bool has_fun = false;
    bool in_fun_body = false;

    explicit Gen(uint64_t seed, int max_stmts) : rng(seed), budget(max_stmts) {}

    size_t pick(size_t n) {
        return std::uniform_int_distribution<size_t>(0, n - 1)(rng);
    }
    bool chance(unsigned percent) { return pick(100) < percent; }
    uint64_t wide_of(const std::vector<uint64_t>& v) { return v[pick(v.size())]; }

    // ------------------------------------------------------------------
    // Expressions

    ExprPtr int_const(const LType& t) {
        bool sg = t.sign() == ir::Sign::Signed;
        ir::Int v;
        switch (pick(7)) {
            case 0: v = 0; break;
            case 1: v = 1; break;
            case 2: v = 2; break;
            case 3: v = ir::Int(pick(9)); break;
            case 4: v = (ir::Int(1) << t.bits()) - 1; break;  // wraps to -1 signed
            case 5: v = (ir::Int(1) << (t.bits() - 1)); break;
            default: v = ir::Int(3 + pick(5)); break;
        }
        return Expr::constant(ir::Literal::integer(t.bits(), t.sign(), sg ? -v : v));
    }

    ExprPtr int_var(const LType& t) {
        if (t == kWide) {
            if (in_fun_body && chance(35)) return Expr::par("f.x", kWide);
            return Expr::var(pick(2) == 0 ? "a" : "b", kWide);
        }
        if (t == kByte) return Expr::var("c", kByte);
        return Expr::var("d", kSByte);
    }

    const LType& some_int_ty() {
        switch (pick(4)) {
            case 0: case 1: return kWide;
            case 2: return kByte;
            default: return kSByte;
        }
    }

    ExprPtr int_expr(const LType& t, int depth) {
        if (depth <= 0 || chance(30))
            return chance(45) ? int_const(t) : int_var(t);
        unsigned roll = static_cast<unsigned>(pick(100));
        if (roll < 45) {
            static const ir::BinOp ops[] = {ir::BinOp::Add, ir::BinOp::Add,
                                            ir::BinOp::Sub, ir::BinOp::Sub,
                                            ir::BinOp::Mul, ir::BinOp::Div,
                                            ir::BinOp::Mod};
            return Expr::binop(ops[pick(7)], int_expr(t, depth - 1),
                               int_expr(t, depth - 1));
        }
        if (roll < 57) {
            const LType& from = t == kWide ? (pick(2) == 0 ? kByte : kSByte)
                                           : (t == kByte ? kWide : kByte);
            return Expr::cast(t, int_expr(from, depth - 1));
        }
        if (roll < 64 && t.sign() == ir::Sign::Signed)
            return Expr::unop(ir::UnOp::Neg, int_expr(t, depth - 1));
        if (t == kWide) {
            if (roll < 76)
                return Expr::index(Expr::var("arr", LType::array(kWide, 4)),
                                   index_key(depth));
            if (roll < 86)
                return Expr::index(Expr::var("tab", LType::mapping(kWide, kWide)),
                                   int_expr(kWide, depth - 1));
            switch (pick(3)) {
                case 0: return Expr::field_special(ir::SpecialRef::Msg, {"values"}, kWide);
                case 1: return Expr::field_special(ir::SpecialRef::This, {"balance"}, kWide);
                default: return Expr::field_special(ir::SpecialRef::Block, {"number"}, kWide);
            }
        }
        return chance(50) ? int_const(t) : int_var(t);
    }

    // Mostly in-range constants, occasionally past the end so both engines
    // must agree on range faults.
    ExprPtr index_key(int depth) {
        if (chance(75))
            return Expr::constant(
                ir::Literal::integer(64, ir::Sign::Unsigned, ir::Int(pick(6))));
        return int_expr(kWide, std::min(depth - 1, 1));
    }

    ExprPtr bool_expr(int depth) {
        if (depth <= 0 || chance(25)) {
            unsigned roll = static_cast<unsigned>(pick(100));
            if (roll < 45) return Expr::var(pick(2) == 0 ? "p" : "q", LType::boolean());
            if (roll < 90) return Expr::constant(ir::Literal::boolean(pick(2) == 0));
            return Expr::var(germ::kSendResultVar, LType::boolean());
        }
        unsigned roll = static_cast<unsigned>(pick(100));
        if (roll < 35) {
            static const ir::BinOp ops[] = {ir::BinOp::Lt, ir::BinOp::Le,
                                            ir::BinOp::Gt, ir::BinOp::Ge};
            const LType& t = some_int_ty();
            return Expr::binop(ops[pick(4)], int_expr(t, depth - 1),
                               int_expr(t, depth - 1));
        }
        if (roll < 55) {
            ir::BinOp op = pick(2) == 0 ? ir::BinOp::Eq : ir::BinOp::Ne;
            if (chance(30))
                return Expr::binop(op, bool_expr(depth - 1), bool_expr(depth - 1));
            const LType& t = some_int_ty();
            return Expr::binop(op, int_expr(t, depth - 1), int_expr(t, depth - 1));
        }
        if (roll < 80)
            return Expr::binop(pick(2) == 0 ? ir::BinOp::And : ir::BinOp::Or,
                               bool_expr(depth - 1), bool_expr(depth - 1));
        return Expr::unop(ir::UnOp::Not, bool_expr(depth - 1));
    }

    ExprPtr address_expr() {
        if (chance(40))
            return Expr::field_special(ir::SpecialRef::Msg, {"sender"},
                                       LType::address());
        uint8_t b = static_cast<uint8_t>(0x11 * pick(4));
        return Expr::constant(ir::Literal::address_lit(std::vector<uint8_t>(20, b)));
    }

    // ------------------------------------------------------------------
    // Statements

    StmtPtr assign_scalar() {
        switch (pick(5)) {
            case 0: return Statement::assign(Expr::var("a", kWide), int_expr(kWide, 3));
            case 1: return Statement::assign(Expr::var("b", kWide), int_expr(kWide, 3));
            case 2: return Statement::assign(Expr::var("c", kByte), int_expr(kByte, 3));
            case 3: return Statement::assign(Expr::var("d", kSByte), int_expr(kSByte, 3));
            default:
                return Statement::assign(Expr::var(pick(2) == 0 ? "p" : "q",
                                                   LType::boolean()),
                                         bool_expr(2));
        }
    }

    StmtPtr assign_aggregate() {
        if (pick(2) == 0)
            return Statement::assign(
                Expr::index(Expr::var("arr", LType::array(kWide, 4)), index_key(2)),
                int_expr(kWide, 2));
        return Statement::assign(
            Expr::index(Expr::var("tab", LType::mapping(kWide, kWide)),
                        int_expr(kWide, 2)),
            int_expr(kWide, 2));
    }

    StmtPtr send_stmt() {
        static const char* fams[] = {germ::kSendBuiltin, germ::kSendBuiltin,
                                     germ::kCallBuiltin, germ::kTransferBuiltin};
        return Statement::fun_call(
            Expr::fun(fams[pick(4)], LType::boolean()),
            {address_expr(), int_expr(kWide, 2)});
    }

    StmtPtr counted_nil() {
        --budget;
        return Statement::nil();
    }

    StmtPtr block_of(int want, int depth) {
        ir::Program body;
        for (int i = 0; i < want && budget > 0; ++i) body.push_back(gen_stmt(depth));
        if (body.empty()) body.push_back(counted_nil());
        return Statement::seq(std::move(body));
    }

    // Every statement node the program will count costs one budget unit, so
    // compound forms are only chosen when their mandatory children still fit.
    StmtPtr gen_stmt(int depth) {
        --budget;
        unsigned roll = static_cast<unsigned>(pick(100));
        if (roll < 30) return assign_scalar();
        if (roll < 45) return assign_aggregate();
        if (roll < 60 && depth > 0 && budget >= 2) {
            bool want_else = chance(70);
            --budget;  // reserved for the else slot
            StmtPtr then_b = block_of(1 + static_cast<int>(pick(2)), depth - 1);
            ++budget;
            StmtPtr else_b = want_else ? block_of(1, depth - 1) : counted_nil();
            return Statement::if_(bool_expr(2), then_b, else_b);
        }
        if (roll < 68 && depth > 0 && budget >= 1)
            return Statement::while_(bool_expr(2), block_of(1 + static_cast<int>(pick(2)), depth - 1));
        if (roll < 73 && depth > 0 && budget >= 3) {
            budget -= 2;  // init and step below
            StmtPtr init = Statement::assign(Expr::var("c", kByte), int_const(kByte));
            ExprPtr cond = Expr::binop(ir::BinOp::Lt, Expr::var("c", kByte),
                                       int_const(kByte));
            StmtPtr step = Statement::assign(
                Expr::var("c", kByte),
                Expr::binop(ir::BinOp::Add, Expr::var("c", kByte),
                            Expr::constant(ir::Literal::integer(
                                8, ir::Sign::Unsigned, 1))));
            return Statement::for_(init, cond, step, block_of(1, depth - 1));
        }
        if (roll < 81) return send_stmt();
        if (roll < 87 && has_fun && !in_fun_body)
            return Statement::fun_call(Expr::fun("f", LType::undef()),
                                       {int_expr(kWide, 2)});
        if (roll < 91)
            return Statement::ret(chance(60) ? nullptr : int_expr(kWide, 2));
        if (roll < 95) return Statement::throw_();
        return Statement::nil();
    }

    StmtPtr gen_fun() {
        in_fun_body = true;
        ir::Program body;
        int want = 2 + static_cast<int>(pick(2));
        for (int i = 0; i < want && budget > 0; ++i) {
            --budget;
            unsigned roll = static_cast<unsigned>(pick(100));
            if (roll < 55) body.push_back(assign_scalar());
            else if (roll < 75) body.push_back(assign_aggregate());
            else if (roll < 90 && budget >= 2) {
                budget -= 2;  // branch and else slots
                body.push_back(Statement::if_(bool_expr(2), assign_scalar(),
                                              Statement::nil()));
            } else body.push_back(Statement::ret(nullptr));
        }
        in_fun_body = false;
        return Statement::fun(std::nullopt, Expr::fun("f", LType::undef()),
                              {Expr::par("f.x", kWide)}, std::move(body));
    }

    ir::Program program() {
        ir::Program p;
        auto decl = [&](const char* name, LType ty) {
            --budget;
            p.push_back(Statement::var_decl(std::nullopt, Expr::var(name, ty)));
        };
        decl("a", kWide);
        decl("b", kWide);
        decl("c", kByte);
        decl("d", kSByte);
        decl("p", LType::boolean());
        decl("q", LType::boolean());
        decl("arr", LType::array(kWide, 4));
        decl("tab", LType::mapping(kWide, kWide));
        if (chance(40) && budget > 4) {
            has_fun = true;
            --budget;
            p.push_back(gen_fun());
        }
        int body = 1 + static_cast<int>(pick(12));
        for (int i = 0; i < body && budget > 0; ++i) p.push_back(gen_stmt(2));
        return p;
    }
};

}  // namespace

ir::Program gen_program(uint64_t seed, const GenOptions& opts) {
    Gen g(seed, opts.max_stmts);
    return g.program();
}

uint64_t case_seed(uint64_t campaign_seed, uint64_t index) {
    uint64_t z = campaign_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

size_t count_one(const StmtPtr& s) {
    if (!s) return 0;
    size_t inner = 0;
    for (const auto& c : s->stmts) inner += count_one(c);
    inner += count_one(s->s1) + count_one(s->s2) + count_one(s->s3);
    return (s->kind == Statement::Kind::Seq ? 0 : 1) + inner;
}

}  // namespace

size_t count_stmts(const ir::Program& p) {
    size_t n = 0;
    for (const auto& s : p) n += count_one(s);
    return n;
}

namespace {

StmtPtr swap_one(const StmtPtr& s) {
    if (!s) return nullptr;
    auto swap_block = [](const ir::Program& in) {
        ir::Program out;
        out.reserve(in.size());
        for (const auto& c : in) out.push_back(swap_one(c));
        return out;
    };
    switch (s->kind) {
        case Statement::Kind::If:
            return Statement::if_(s->e1, swap_one(s->s2), swap_one(s->s1), s->line);
        case Statement::Kind::Seq:
            return Statement::seq(swap_block(s->stmts), s->line);
        case Statement::Kind::While:
            return Statement::while_(s->e1, swap_one(s->s1), s->line);
        case Statement::Kind::For:
            return Statement::for_(swap_one(s->s1), s->e1, swap_one(s->s2),
                                   swap_one(s->s3), s->line);
        case Statement::Kind::Fun:
            return Statement::fun(s->vis, s->e1, s->args, swap_block(s->stmts),
                                  s->line);
        case Statement::Kind::Contract:
            return Statement::contract(s->e1, s->parents, swap_block(s->stmts),
                                       s->line);
        default:
            return s;
    }
}

}  // namespace

ir::Program with_swapped_if_branches(const ir::Program& p) {
    ir::Program out;
    out.reserve(p.size());
    for (const auto& s : p) out.push_back(swap_one(s));
    return out;
}

// ---------------------------------------------------------------------------
// Campaign

namespace {

struct CaseSetup {
    fether::Fuel fuel;
    unsigned uint_bits;
    size_t memory_size;
    std::vector<bool> script;
    bool swap;
};

std::optional<Divergence> run_case(const ir::Program& prog, const CaseSetup& setup) {
    auto table = frontend::build_table(prog);
    fether::ExecConfig cfg;
    cfg.fuel = setup.fuel;
    cfg.lib = germ::StdLib{setup.uint_bits};
    cfg.strategy.space = setup.memory_size;
    cfg.resolve = [table](const std::string& name) { return table.find(name); };
    cfg.sends.mode = fether::SendPolicy::Mode::Scripted;
    cfg.sends.script = setup.script;
    auto m0 = germ::Memory::init(setup.memory_size, cfg.lib);

    fether::Machine machine(cfg);
    auto left = setup.swap ? machine.run(with_swapped_if_branches(prog), m0)
                           : machine.run(prog, m0);
    auto right = ref_exec(prog, m0, cfg);
    return relate(left, right);
}

CaseSetup setup_for(uint64_t seed, const CampaignOptions& opts) {
    CaseSetup setup;
    setup.fuel = opts.fuel;
    setup.uint_bits = opts.uint_bits;
    setup.memory_size = opts.memory_size;
    setup.swap = opts.swap_if_branches;
    std::mt19937_64 rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL);
    for (int i = 0; i < 6; ++i) setup.script.push_back(rng() & 1);
    return setup;
}

// One round of candidate programs strictly smaller than `p`.
std::vector<ir::Program> reductions(const ir::Program& p);

void stmt_alternatives(const StmtPtr& s, std::vector<StmtPtr>& out) {
    if (!s) return;
    auto with_block = [&](auto rebuild) {
        for (size_t i = 0; i < s->stmts.size(); ++i) {
            ir::Program smaller;
            for (size_t j = 0; j < s->stmts.size(); ++j)
                if (j != i) smaller.push_back(s->stmts[j]);
            out.push_back(rebuild(std::move(smaller)));
            std::vector<StmtPtr> alts;
            stmt_alternatives(s->stmts[i], alts);
            for (auto& alt : alts) {
                ir::Program swapped = s->stmts;
                swapped[i] = std::move(alt);
                out.push_back(rebuild(std::move(swapped)));
            }
        }
    };
    switch (s->kind) {
        case Statement::Kind::If: {
            if (s->s1) out.push_back(s->s1);
            if (s->s2) out.push_back(s->s2);
            std::vector<StmtPtr> alts;
            stmt_alternatives(s->s1, alts);
            for (auto& a : alts) out.push_back(Statement::if_(s->e1, a, s->s2, s->line));
            alts.clear();
            stmt_alternatives(s->s2, alts);
            for (auto& a : alts) out.push_back(Statement::if_(s->e1, s->s1, a, s->line));
            break;
        }
        case Statement::Kind::While: {
            if (s->s1) out.push_back(s->s1);
            std::vector<StmtPtr> alts;
            stmt_alternatives(s->s1, alts);
            for (auto& a : alts)
                out.push_back(Statement::while_(s->e1, a, s->line));
            break;
        }
        case Statement::Kind::For:
            if (s->s1) out.push_back(s->s1);
            if (s->s3) out.push_back(s->s3);
            break;
        case Statement::Kind::Seq: {
            for (const auto& c : s->stmts)
                if (c) out.push_back(c);
            with_block([&](ir::Program ss) {
                return Statement::seq(std::move(ss), s->line);
            });
            break;
        }
        case Statement::Kind::Fun:
            with_block([&](ir::Program ss) {
                return Statement::fun(s->vis, s->e1, s->args, std::move(ss), s->line);
            });
            break;
        default:
            break;
    }
}

std::vector<ir::Program> reductions(const ir::Program& p) {
    std::vector<ir::Program> out;
    for (size_t i = 0; i < p.size(); ++i) {
        ir::Program dropped;
        for (size_t j = 0; j < p.size(); ++j)
            if (j != i) dropped.push_back(p[j]);
        out.push_back(std::move(dropped));
        std::vector<StmtPtr> alts;
        stmt_alternatives(p[i], alts);
        for (auto& alt : alts) {
            ir::Program replaced = p;
            replaced[i] = std::move(alt);
            out.push_back(std::move(replaced));
        }
    }
    return out;
}

ir::Program shrink(ir::Program prog, const CaseSetup& setup) {
    // Greedy first-improvement descent, bounded so a pathological case
    // cannot stall the campaign.
    int tested = 0;
    bool improved = true;
    while (improved && tested < 2000) {
        improved = false;
        for (auto& cand : reductions(prog)) {
            ++tested;
            if (tested >= 2000) break;
            if (run_case(cand, setup)) {
                prog = std::move(cand);
                improved = true;
                break;
            }
        }
    }
    return prog;
}

}  // namespace

std::optional<Divergence> check_case(const ir::Program& prog, uint64_t seed,
                                     const CampaignOptions& opts) {
    return run_case(prog, setup_for(seed, opts));
}

CampaignResult run_campaign(const CampaignOptions& opts) {
    int workers = std::max(1, opts.workers);
    std::atomic<uint64_t> first_hit{UINT64_MAX};
    std::atomic<uint64_t> examined{0};

    auto scan = [&](int shard) {
        for (uint64_t i = shard; i < opts.count;
             i += static_cast<uint64_t>(workers)) {
            if (i >= first_hit.load(std::memory_order_relaxed)) break;
            uint64_t seed = case_seed(opts.seed, i);
            auto prog = gen_program(seed, GenOptions{opts.max_stmts});
            examined.fetch_add(1, std::memory_order_relaxed);
            if (!run_case(prog, setup_for(seed, opts))) continue;
            uint64_t seen = first_hit.load();
            while (i < seen && !first_hit.compare_exchange_weak(seen, i)) {
            }
        }
    };

    if (workers == 1) {
        scan(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(scan, w);
        for (auto& t : pool) t.join();
    }

    CampaignResult result;
    result.cases = examined.load();
    if (first_hit.load() == UINT64_MAX) return result;

    uint64_t index = first_hit.load();
    uint64_t seed = case_seed(opts.seed, index);
    auto setup = setup_for(seed, opts);
    auto prog = shrink(gen_program(seed, GenOptions{opts.max_stmts}), setup);
    auto div = run_case(prog, setup);

    result.divergences = 1;
    Repro repro;
    repro.case_index = index;
    repro.seed = seed;
    repro.program = frontend::pretty(prog);
    repro.stmt_count = count_stmts(prog);
    repro.divergence = div ? *div : Divergence{"outcome", "", ""};
    result.first = std::move(repro);
    return result;
}

}  // namespace fspvm::oracle
