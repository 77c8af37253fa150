#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fspvm/fether.hpp"
#include "fspvm/frontend.hpp"
#include "fspvm/germ.hpp"
#include "fspvm/ir.hpp"
#include "fspvm/oracle.hpp"

using namespace fspvm;
using fether::ExecOutcome;
using germ::Value;
using ir::Expr;
using ir::Statement;
using oracle::RefOutcome;

namespace {

ir::LType u64_ty() { return ir::LType::integer(64, ir::Sign::Unsigned); }
ir::LType u8_ty() { return ir::LType::integer(8, ir::Sign::Unsigned); }

ir::ExprPtr uconst(uint64_t v, unsigned bits = 64) {
    return Expr::constant(ir::Literal::integer(bits, ir::Sign::Unsigned, ir::Int(v)));
}

Value uv(uint64_t v, unsigned bits = 64) {
    return Value::integer(bits, ir::Sign::Unsigned, ir::Int(v));
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Raw-program harness mirroring the interpreter tests: names interned up
// front so label resolution works without a source translation.
struct Rig {
    frontend::AddressTable table;
    fether::ExecConfig cfg;

    explicit Rig(std::vector<std::string> names, unsigned bits = 64) {
        for (auto& n : names) table.intern(n);
        cfg.lib.uint_bits = bits;
        cfg.strategy.space = 256;
        auto t = table;
        cfg.resolve = [t](const std::string& k) { return t.find(k); };
    }

    germ::Memory fresh() const {
        return germ::Memory::init(cfg.strategy.space, cfg.lib);
    }
};

// Asserts the interpreter and the reference evaluator agree on `prog`, and
// surfaces the first disagreement in the failure message when they do not.
void agree(const ir::Program& prog, const germ::Memory& m0,
           const fether::ExecConfig& cfg) {
    auto d = oracle::check_equiv(prog, m0, cfg);
    if (d) {
        CAPTURE(d->observable);
        CAPTURE(d->left);
        CAPTURE(d->right);
        CHECK(!d);
    }
}

void agree_call(const ir::Program& prog, const std::string& fn,
                const std::vector<Value>& args, const germ::Memory& m0,
                const fether::ExecConfig& cfg) {
    auto d = oracle::check_equiv_call(prog, fn, args, m0, cfg);
    if (d) {
        CAPTURE(fn);
        CAPTURE(d->observable);
        CAPTURE(d->left);
        CAPTURE(d->right);
        CHECK(!d);
    }
}

// Translated pledge contract plus a config wired to its address table.
struct Corpus {
    frontend::ProgramImage image;
    fether::ExecConfig cfg;
    germ::Memory m0;

    static Corpus make(fether::SendPolicy sends = {}) {
        auto src = slurp(std::string(FSPVM_CORPUS_DIR) + "/ssc.sol");
        auto tr = frontend::translate_source(src, "ssc.sol", 64);
        REQUIRE(tr.image);
        fether::ExecConfig cfg;
        cfg.lib.uint_bits = 64;
        cfg.strategy.space = 256;
        cfg.sends = std::move(sends);
        auto table = tr.image->table;
        cfg.resolve = [table](const std::string& k) { return table.find(k); };
        return Corpus{*tr.image, cfg,
                      germ::Memory::init(cfg.strategy.space, cfg.lib)};
    }

    germ::Memory with_msg(uint64_t value, uint8_t sender_byte) const {
        auto m = fether::with_special_member(m0, ir::SpecialRef::Msg, "values",
                                             uv(value), cfg.lib);
        REQUIRE(m);
        auto m2 = fether::with_special_member(
            *m, ir::SpecialRef::Msg, "sender",
            Value::bytes_v(std::vector<uint8_t>(20, sender_byte)), cfg.lib);
        REQUIRE(m2);
        return *m2;
    }
};

Value zero32() { return Value::bytes_v(std::vector<uint8_t>(32, 0)); }

}  // namespace

TEST_CASE("reference evaluator settles trivial programs like the interpreter") {
    Rig rig({});
    auto m0 = rig.fresh();

    auto none = oracle::ref_exec({}, m0, rig.cfg);
    CHECK(none.kind == RefOutcome::Kind::Normal);
    CHECK(none.gas_used == 0);
    CHECK(none.memory == m0);

    auto nil = oracle::ref_exec({Statement::nil()}, m0, rig.cfg);
    CHECK(nil.kind == RefOutcome::Kind::Normal);
    CHECK(nil.gas_used == 1);
    CHECK(nil.steps == 1);
    CHECK(nil.memory == m0);

    agree({}, m0, rig.cfg);
    agree({Statement::nil()}, m0, rig.cfg);
}

TEST_CASE("spin loop runs out of gas after exactly the budget on both sides") {
    ir::Program spin = {Statement::while_(
        Expr::constant(ir::Literal::boolean(true)), Statement::nil())};
    for (uint64_t budget : {1u, 10u, 100u}) {
        Rig rig({});
        rig.cfg.fuel.gas = budget;
        auto m0 = rig.fresh();

        auto ref = oracle::ref_exec(spin, m0, rig.cfg);
        CHECK(ref.kind == RefOutcome::Kind::OutOfGas);
        REQUIRE(ref.stop.has_value());
        CHECK(*ref.stop == fether::StopReason::GasLimit);
        CHECK(ref.gas_used == budget);
        CHECK(ref.steps == budget);

        agree(spin, m0, rig.cfg);
    }
}

TEST_CASE("handcrafted programs agree between interpreter and reference") {
    Rig rig({"x", "y", "c", "arr"});
    auto m0 = rig.fresh();
    auto x = Expr::var("x", u64_ty());
    auto y = Expr::var("y", u64_ty());
    auto c = Expr::var("c", u8_ty());

    SUBCASE("assignments and arithmetic") {
        agree({Statement::var_decl(std::nullopt, x),
               Statement::var_decl(std::nullopt, y),
               Statement::assign(x, uconst(7)),
               Statement::assign(y, Expr::binop(ir::BinOp::Mul, x, uconst(6))),
               Statement::assign(x, Expr::binop(ir::BinOp::Sub, y, x))},
              m0, rig.cfg);
    }

    SUBCASE("narrow overflow raises the same event on both sides") {
        agree({Statement::var_decl(std::nullopt, c),
               Statement::assign(
                   c, Expr::binop(ir::BinOp::Add, uconst(200, 8), uconst(100, 8)))},
              m0, rig.cfg);
    }

    SUBCASE("division by zero faults identically") {
        agree({Statement::var_decl(std::nullopt, x),
               Statement::assign(x, Expr::binop(ir::BinOp::Div, uconst(1), uconst(0)))},
              m0, rig.cfg);
    }

    SUBCASE("throw rolls back to the same entry image") {
        agree({Statement::var_decl(std::nullopt, x),
               Statement::assign(x, uconst(9)), Statement::throw_()},
              m0, rig.cfg);
    }

    SUBCASE("index out of range faults identically") {
        auto arr = Expr::var("arr", ir::LType::array(u64_ty(), 4));
        agree({Statement::var_decl(std::nullopt, arr),
               Statement::assign(Expr::index(arr, uconst(7)), uconst(1))},
              m0, rig.cfg);
    }

    SUBCASE("scripted sends and latch reads line up") {
        fether::SendPolicy sends;
        sends.mode = fether::SendPolicy::Mode::Scripted;
        sends.script = {true, false};
        rig.cfg.sends = sends;
        auto p = Expr::var("p", ir::LType::boolean());
        auto latch = Expr::var(germ::kSendResultVar, ir::LType::boolean());
        auto target = Expr::constant(
            ir::Literal::address_lit(std::vector<uint8_t>(20, 0x11)));
        Rig rig2({"p"});
        rig2.cfg.sends = sends;
        agree({Statement::var_decl(std::nullopt, p),
               Statement::fun_call(Expr::fun(germ::kSendBuiltin, ir::LType::boolean()),
                                   {target, uconst(3)}),
               Statement::assign(p, latch),
               Statement::fun_call(Expr::fun(germ::kSendBuiltin, ir::LType::boolean()),
                                   {target, uconst(4)}),
               Statement::assign(p, latch)},
              rig2.fresh(), rig2.cfg);
    }

    SUBCASE("latch read before any send faults identically") {
        auto latch = Expr::var(germ::kSendResultVar, ir::LType::boolean());
        Rig rig2({"p"});
        auto p = Expr::var("p", ir::LType::boolean());
        agree({Statement::var_decl(std::nullopt, p), Statement::assign(p, latch)},
              rig2.fresh(), rig2.cfg);
    }

    SUBCASE("function definition, call and return agree") {
        Rig rig2({"acc", "f()", "f.n"});
        auto acc = Expr::var("acc", u64_ty());
        auto n = Expr::par("f.n", u64_ty());
        ir::Program body = {
            Statement::assign(acc, Expr::binop(ir::BinOp::Add, acc, n)),
            Statement::ret(nullptr),
        };
        agree({Statement::var_decl(std::nullopt, acc),
               Statement::fun(std::nullopt, Expr::fun("f", ir::LType::undef()),
                              {n}, body),
               Statement::fun_call(Expr::fun("f", ir::LType::undef()), {uconst(5)}),
               Statement::fun_call(Expr::fun("f", ir::LType::undef()), {uconst(8)})},
              rig2.fresh(), rig2.cfg);
    }

    SUBCASE("counted while and for loops agree") {
        auto lt = Expr::binop(ir::BinOp::Lt, c, uconst(5, 8));
        auto inc = Statement::assign(
            c, Expr::binop(ir::BinOp::Add, c, uconst(1, 8)));
        agree({Statement::var_decl(std::nullopt, c),
               Statement::while_(lt, inc)},
              m0, rig.cfg);
        agree({Statement::var_decl(std::nullopt, c),
               Statement::var_decl(std::nullopt, x),
               Statement::for_(Statement::assign(c, uconst(0, 8)), lt, inc,
                               Statement::assign(
                                   x, Expr::binop(ir::BinOp::Add, x, uconst(2))))},
              m0, rig.cfg);
    }
}

TEST_CASE("pledge contract deploy and entry points agree under both guard polarities") {
    auto corpus = Corpus::make();
    agree(corpus.image.program, corpus.m0, corpus.cfg);

    // msg.value zero trips the pledge guard; five satisfies it. A nonzero
    // sender trips the owner guards of refund and drawdown; zero passes them.
    for (uint64_t value : {0ull, 5ull}) {
        for (uint8_t sender : {uint8_t{0}, uint8_t{0x11}}) {
            auto m = corpus.with_msg(value, sender);
            agree_call(corpus.image.program, "pledge", {zero32()}, m, corpus.cfg);
            agree_call(corpus.image.program, "refund", {}, m, corpus.cfg);
            agree_call(corpus.image.program, "drawdown", {}, m, corpus.cfg);
            agree_call(corpus.image.program, "smartSponsor",
                       {Value::bytes_v(std::vector<uint8_t>(20, 0x22))}, m,
                       corpus.cfg);
        }
    }
}

TEST_CASE("refund over recorded pledges agrees for passing and failing sends") {
    for (bool send_ok : {true, false}) {
        fether::SendPolicy sends;
        sends.mode = fether::SendPolicy::Mode::Scripted;
        // First entry serves the pledge's own send, the rest the refund loop.
        sends.script = {true, send_ok, send_ok};
        auto corpus = Corpus::make(sends);

        fether::Machine machine(corpus.cfg);
        auto dep = machine.run(corpus.image.program, corpus.with_msg(5, 0));
        REQUIRE(dep.kind == ExecOutcome::Kind::Normal);
        auto pledged = machine.call("pledge", {zero32()}, dep.memory);
        REQUIRE(pledged.kind == ExecOutcome::Kind::Normal);

        agree_call(corpus.image.program, "refund", {}, pledged.memory, corpus.cfg);
    }
}

TEST_CASE("reference call reports the recorded pledge") {
    auto corpus = Corpus::make();
    auto m = corpus.with_msg(5, 0x33);
    auto out = oracle::ref_call(corpus.image.program, "pledge", {zero32()}, m,
                                corpus.cfg);
    REQUIRE(out.kind == RefOutcome::Kind::Normal);

    auto table = corpus.image.table;
    auto lab = table.find("numPledges");
    REQUIRE(lab);
    auto addr = corpus.cfg.strategy.map(*lab).value();
    CHECK(out.memory.cell(addr).v == uv(1));

    auto plab = table.find("pledges");
    REQUIRE(plab);
    auto paddr = corpus.cfg.strategy.map(*plab).value();
    Value tab = out.memory.cell(paddr).v;
    REQUIRE(tab.kind() == Value::Kind::MappingV);
    const Value& entry = tab.map_get(uv(0));
    REQUIRE(entry.kind() == Value::Kind::StructV);
    CHECK(entry.members()[0] == uv(5));
    CHECK(entry.members()[1] == Value::bytes_v(std::vector<uint8_t>(20, 0x33)));
}

TEST_CASE("generated programs are deterministic and well typed") {
    for (uint64_t i = 0; i < 300; ++i) {
        uint64_t seed = oracle::case_seed(42, i);
        auto p1 = oracle::gen_program(seed, {});
        auto p2 = oracle::gen_program(seed, {});
        REQUIRE(frontend::pretty(p1) == frontend::pretty(p2));

        auto ctx = frontend::build_context(p1, 64);
        auto report = ir::typecheck_program(p1, ctx);
        if (!report.well_typed) {
            CAPTURE(seed);
            CAPTURE(report.error->path);
            CAPTURE(report.error->message);
            CHECK(report.well_typed);
        }
        CHECK(oracle::count_stmts(p1) <= 30);
    }
}

TEST_CASE("statement counting and branch swapping") {
    auto x = Expr::var("x", u64_ty());
    auto t = Expr::constant(ir::Literal::boolean(true));
    ir::Program p = {
        Statement::var_decl(std::nullopt, x),
        Statement::if_(t, Statement::assign(x, uconst(1)),
                       Statement::seq({Statement::assign(x, uconst(2)),
                                       Statement::nil()})),
        Statement::while_(t, Statement::throw_()),
    };
    // decl + if + (then assign) + (else assign + nil) + while + throw
    CHECK(oracle::count_stmts(p) == 7);

    auto swapped = oracle::with_swapped_if_branches(p);
    CHECK(frontend::pretty(swapped) != frontend::pretty(p));
    CHECK(frontend::pretty(oracle::with_swapped_if_branches(swapped)) ==
          frontend::pretty(p));
}

TEST_CASE("differential campaign finds no divergence on generated cases") {
    oracle::CampaignOptions opts;
    opts.count = 1000;
    auto result = oracle::run_campaign(opts);
    if (result.first) {
        CAPTURE(result.first->case_index);
        CAPTURE(result.first->program);
        CAPTURE(result.first->divergence.observable);
        CAPTURE(result.first->divergence.left);
        CAPTURE(result.first->divergence.right);
    }
    CHECK(result.divergences == 0);
    CHECK(result.cases == 1000);

    opts.workers = 2;
    auto threaded = oracle::run_campaign(opts);
    CHECK(threaded.divergences == 0);
    CHECK(threaded.cases == 1000);
}

TEST_CASE("branch swap mutation is caught and shrunk to a small repro") {
    oracle::CampaignOptions opts;
    opts.count = 2000;
    opts.swap_if_branches = true;
    auto result = oracle::run_campaign(opts);
    REQUIRE(result.divergences == 1);
    REQUIRE(result.first.has_value());
    const auto& repro = *result.first;
    CHECK(repro.stmt_count <= 12);
    CHECK(!repro.program.empty());
    CHECK(!repro.divergence.observable.empty());

    // The minimized text reproduces: parse it back and replay the case.
    auto parsed = frontend::read_program(repro.program);
    REQUIRE(parsed.program);
    auto again = oracle::check_case(*parsed.program, repro.seed, opts);
    REQUIRE(again.has_value());
    CHECK(again->observable == repro.divergence.observable);
}
