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

using namespace fspvm;
using fether::ExecOutcome;
using fether::FaultKind;
using germ::Value;
using ir::Expr;
using ir::Statement;

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

// Raw-program harness: names are interned up front so label resolution works
// without a source translation.
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

    germ::Memory fresh() const { return germ::Memory::init(cfg.strategy.space, cfg.lib); }

    germ::MachineAddress addr(const std::string& key) const {
        auto lab = table.find(key);
        REQUIRE(lab);
        auto ma = cfg.strategy.map(*lab);
        REQUIRE(ma.ok_p());
        return ma.value();
    }
};

// Translated SSC image plus a machine with the contract deployed.
struct Deployed {
    frontend::ProgramImage image;
    fether::ExecConfig cfg;
    fether::Machine machine;
    germ::Memory m0;

    static Deployed make(fether::SendPolicy sends = {}) {
        auto src = slurp(std::string(FSPVM_CORPUS_DIR) + "/ssc.sol");
        auto tr = frontend::translate_source(src, "ssc.sol", 64);
        REQUIRE(tr.image);
        fether::ExecConfig cfg;
        cfg.lib.uint_bits = 64;
        cfg.strategy.space = 256;
        cfg.sends = std::move(sends);
        auto table = tr.image->table;
        cfg.resolve = [table](const std::string& k) { return table.find(k); };
        Deployed d{*tr.image, cfg, fether::Machine(cfg),
                   germ::Memory::init(cfg.strategy.space, cfg.lib)};
        auto out = d.machine.run(d.image.program, d.m0);
        REQUIRE(out.kind == ExecOutcome::Kind::Normal);
        d.m0 = out.memory;
        return d;
    }

    germ::MachineAddress addr(const std::string& key) const {
        auto lab = image.table.find(key);
        REQUIRE(lab);
        return cfg.strategy.map(*lab).value();
    }
};

}  // namespace

TEST_CASE("empty and nil programs terminate normally without touching memory") {
    Rig rig({});
    fether::Machine mach(rig.cfg);
    auto m0 = rig.fresh();

    auto none = mach.run({}, m0);
    CHECK(none.kind == ExecOutcome::Kind::Normal);
    CHECK(none.gas_used == 0);
    CHECK(none.memory == m0);

    auto nil = mach.run({Statement::nil()}, m0);
    CHECK(nil.kind == ExecOutcome::Kind::Normal);
    CHECK(nil.gas_used == 1);
    CHECK(nil.steps == 1);
    CHECK(nil.memory == m0);
}

TEST_CASE("assignment stores and a later read observes the value") {
    Rig rig({"x"});
    fether::Machine mach(rig.cfg);
    auto x = Expr::var("x", u64_ty());
    auto out = mach.run({Statement::var_decl(std::nullopt, x),
                         Statement::assign(x, uconst(1)),
                         Statement::assign(x, Expr::binop(ir::BinOp::Add, x, uconst(2)))},
                        rig.fresh());
    REQUIRE(out.kind == ExecOutcome::Kind::Normal);
    CHECK(out.memory.cell(rig.addr("x")).v == uv(3));
    CHECK(out.gas_used == 3);
}

TEST_CASE("sequences are free; only their statements charge") {
    Rig rig({});
    fether::Machine mach(rig.cfg);
    auto out = mach.exec_stmt(Statement::seq({Statement::nil(), Statement::nil()}),
                              rig.fresh());
    CHECK(out.kind == ExecOutcome::Kind::Normal);
    CHECK(out.gas_used == 2);
}

TEST_CASE("spin loop exhausts exactly the configured gas") {
    auto loop = Statement::while_(Expr::constant(ir::Literal::boolean(true)),
                                  Statement::nil());
    for (uint64_t g : {uint64_t(1), uint64_t(10), uint64_t(100)}) {
        Rig rig({});
        rig.cfg.fuel.gas = g;
        rig.cfg.fuel.k_stmt = 10 * g + 10;
        fether::Machine mach(rig.cfg);
        auto out = mach.run({loop}, rig.fresh());
        REQUIRE(out.kind == ExecOutcome::Kind::OutOfGas);
        CHECK(*out.stop == fether::StopReason::GasLimit);
        CHECK(out.gas_used == g);
        CHECK(out.steps == g);
    }
}

TEST_CASE("statement budget stops a run with its own reason") {
    auto loop = Statement::while_(Expr::constant(ir::Literal::boolean(true)),
                                  Statement::nil());
    Rig rig({});
    rig.cfg.fuel.gas = 1000;
    rig.cfg.fuel.k_stmt = 7;
    fether::Machine mach(rig.cfg);
    auto out = mach.run({loop}, rig.fresh());
    REQUIRE(out.kind == ExecOutcome::Kind::OutOfGas);
    CHECK(*out.stop == fether::StopReason::StepBudget);
    CHECK(out.steps == 7);
}

TEST_CASE("for loops charge a header step plus one check per iteration") {
    // for (i = 0; i < 3; i = i + 1) { s = s + i; }
    Rig rig({"i", "s"});
    auto i = Expr::var("i", u64_ty());
    auto s = Expr::var("s", u64_ty());
    auto body = Statement::assign(s, Expr::binop(ir::BinOp::Add, s, i));
    auto step = Statement::assign(i, Expr::binop(ir::BinOp::Add, i, uconst(1)));
    auto loop = Statement::for_(Statement::assign(i, uconst(0)),
                                Expr::binop(ir::BinOp::Lt, i, uconst(3)), step, body);
    fether::Machine mach(rig.cfg);
    auto out = mach.run({Statement::var_decl(std::nullopt, i),
                         Statement::var_decl(std::nullopt, s), loop},
                        rig.fresh());
    REQUIRE(out.kind == ExecOutcome::Kind::Normal);
    CHECK(out.memory.cell(rig.addr("s")).v == uv(3));
    // 2 declarations + header + init + 4 checks + 3 bodies + 3 steps.
    CHECK(out.gas_used == 14);
}

TEST_CASE("throw rolls the whole run back to the entry image") {
    Rig rig({"x"});
    auto x = Expr::var("x", u64_ty());
    fether::Machine mach(rig.cfg);
    auto m0 = rig.fresh();
    // Writes and a send both precede the throw; neither survives it.
    auto send = Statement::fun_call(
        Expr::fun(germ::kSendBuiltin, ir::LType::boolean()),
        {Expr::constant(ir::Literal::address_lit(std::vector<uint8_t>(20, 0xaa))),
         uconst(7)});
    auto out = mach.run(
        {Statement::var_decl(std::nullopt, x), Statement::assign(x, uconst(5)), send,
         Statement::if_(Expr::constant(ir::Literal::boolean(true)), Statement::throw_(),
                        Statement::nil()),
         Statement::assign(x, uconst(9))},
        m0);
    REQUIRE(out.kind == ExecOutcome::Kind::Thrown);
    CHECK(out.memory == m0);
    CHECK(out.memory.event_count() == 0);
    CHECK(fether::as_option(out).has_value());
}

TEST_CASE("abnormal stops have no option-view memory") {
    Rig rig({});
    rig.cfg.fuel.gas = 1;
    fether::Machine mach(rig.cfg);
    auto loop = Statement::while_(Expr::constant(ir::Literal::boolean(true)),
                                  Statement::nil());
    auto out = mach.run({loop}, rig.fresh());
    CHECK(out.kind == ExecOutcome::Kind::OutOfGas);
    CHECK(!fether::as_option(out).has_value());
}

TEST_CASE("unsigned arithmetic wraps and records an overflow event") {
    Rig rig({"x"});
    auto x = Expr::var("x", u8_ty());
    fether::Machine mach(rig.cfg);
    auto out = mach.run({Statement::var_decl(std::nullopt, x),
                         Statement::assign(x, uconst(255, 8)),
                         Statement::assign(x, Expr::binop(ir::BinOp::Add, x, uconst(1, 8)))},
                        rig.fresh());
    REQUIRE(out.kind == ExecOutcome::Kind::Normal);
    CHECK(out.memory.cell(rig.addr("x")).v == uv(0, 8));
    auto events = out.memory.events();
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == germ::Event::Kind::Overflow);
    CHECK(events[0].text() == "OVERFLOW + u8");
}

TEST_CASE("an overflow inside a passing condition still surfaces as an event") {
    Rig rig({"x"});
    auto x = Expr::var("x", u8_ty());
    auto cond = Expr::binop(ir::BinOp::Gt, Expr::binop(ir::BinOp::Add, x, uconst(1, 8)),
                            uconst(0, 8));
    fether::Machine mach(rig.cfg);
    auto out = mach.run({Statement::var_decl(std::nullopt, x),
                         Statement::assign(x, uconst(255, 8)),
                         Statement::if_(cond, Statement::nil(), Statement::nil())},
                        rig.fresh());
    REQUIRE(out.kind == ExecOutcome::Kind::Normal);
    REQUIRE(out.memory.event_count() == 1);
    CHECK(out.memory.events()[0].note == "+ u8");
}

TEST_CASE("division faults on a zero denominator") {
    Rig rig({"x"});
    auto x = Expr::var("x", u64_ty());
    fether::Machine mach(rig.cfg);
    auto out = mach.run({Statement::var_decl(std::nullopt, x),
                         Statement::assign(x, Expr::binop(ir::BinOp::Div, uconst(1),
                                                          uconst(0)))},
                        rig.fresh());
    REQUIRE(out.kind == ExecOutcome::Kind::Fault);
    CHECK(out.fault->kind == FaultKind::DivideByZero);
}

TEST_CASE("fault classification distinguishes the failure modes") {
    auto x = Expr::var("x", u64_ty());

    SUBCASE("unbound name") {
        Rig rig({"x"});
        fether::Machine mach(rig.cfg);
        auto out = mach.run({Statement::assign(x, Expr::var("zz", u64_ty()))}, rig.fresh());
        REQUIRE(out.kind == ExecOutcome::Kind::Fault);
        CHECK(out.fault->kind == FaultKind::UnboundAddress);
    }
    SUBCASE("undefined read") {
        Rig rig({"x", "y"});
        fether::Machine mach(rig.cfg);
        auto out = mach.run({Statement::assign(x, Expr::var("y", u64_ty()))}, rig.fresh());
        REQUIRE(out.kind == ExecOutcome::Kind::Fault);
        CHECK(out.fault->kind == FaultKind::UndefUse);
    }
    SUBCASE("authorization denial") {
        Rig rig({"x", "secret"});
        fether::Machine mach(rig.cfg);
        auto m0 = rig.fresh();
        germ::MemoryCell guarded;
        guarded.v = uv(42);
        guarded.env = guarded.fenv = "alice";
        guarded.occupied = true;
        guarded.auth.kind = germ::Auth::Kind::Internal;
        m0 = m0.write_cell(rig.addr("secret"), guarded);
        auto out = mach.run({Statement::assign(x, Expr::var("secret", u64_ty()))}, m0);
        REQUIRE(out.kind == ExecOutcome::Kind::Fault);
        CHECK(out.fault->kind == FaultKind::AuthDenied);
    }
    SUBCASE("array bounds") {
        Rig rig({"x", "a"});
        auto a = Expr::var("a", ir::LType::array(u64_ty(), 2));
        fether::Machine mach(rig.cfg);
        auto out = mach.run({Statement::var_decl(std::nullopt, a),
                             Statement::assign(x, Expr::index(a, uconst(5)))},
                            rig.fresh());
        REQUIRE(out.kind == ExecOutcome::Kind::Fault);
        CHECK(out.fault->kind == FaultKind::IndexOutOfRange);
    }
    SUBCASE("expression fuel") {
        Rig rig({"x"});
        rig.cfg.fuel.k_val = 2;
        fether::Machine mach(rig.cfg);
        auto out = mach.run(
            {Statement::var_decl(std::nullopt, x),
             Statement::assign(x, Expr::binop(ir::BinOp::Add, uconst(1), uconst(2)))},
            rig.fresh());
        REQUIRE(out.kind == ExecOutcome::Kind::Fault);
        CHECK(out.fault->kind == FaultKind::ExprFuelExhausted);
    }
}

TEST_CASE("a mapping read on an absent key yields the zero value") {
    Rig rig({"x", "m"});
    auto m = Expr::var("m", ir::LType::mapping(u64_ty(), u64_ty()));
    auto x = Expr::var("x", u64_ty());
    fether::Machine mach(rig.cfg);
    auto out = mach.run({Statement::var_decl(std::nullopt, m),
                         Statement::var_decl(std::nullopt, x),
                         Statement::assign(x, Expr::index(m, uconst(9)))},
                        rig.fresh());
    REQUIRE(out.kind == ExecOutcome::Kind::Normal);
    CHECK(out.memory.cell(rig.addr("x")).v == uv(0));
}

TEST_CASE("send policy scripts verdicts in call order and then yields false") {
    Rig rig({});
    rig.cfg.sends.mode = fether::SendPolicy::Mode::Scripted;
    rig.cfg.sends.script = {true, false};
    fether::Machine mach(rig.cfg);
    auto send = Statement::fun_call(
        Expr::fun(germ::kSendBuiltin, ir::LType::boolean()),
        {Expr::constant(ir::Literal::address_lit(std::vector<uint8_t>(20, 0xaa))),
         uconst(7)});
    auto out = mach.run({send, send, send}, rig.fresh());
    REQUIRE(out.kind == ExecOutcome::Kind::Normal);
    auto events = out.memory.events();
    REQUIRE(events.size() == 3);
    CHECK(events[0].result == true);
    CHECK(events[1].result == false);
    CHECK(events[2].result == false);
    CHECK(events[0].text() ==
          "SEND 0xaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa (int 64 u 7) -> true");
    auto latch = out.memory.cell(germ::MachineAddress::special(ir::SpecialAddr::SendRe));
    CHECK(latch.v == Value::boolean(false));
}

TEST_CASE("statement execution touches only the cells the statement names") {
    Rig rig({"x", "y"});
    auto x = Expr::var("x", u64_ty());
    fether::Machine mach(rig.cfg);
    auto m0 = rig.fresh();
    auto out = mach.run({Statement::var_decl(std::nullopt, x),
                         Statement::assign(x, uconst(1))},
                        m0);
    REQUIRE(out.kind == ExecOutcome::Kind::Normal);
    auto changed = rig.addr("x");
    for (uint32_t flat = 0; flat < ir::kSpecialCount + 64; ++flat) {
        germ::MachineAddress a{flat};
        if (a == changed) continue;
        CHECK(out.memory.cell(a) == m0.cell(a));
    }
    CHECK(out.memory.cell(changed).v == uv(1));
}

TEST_CASE("fuel above the needed amount does not change the result") {
    Rig rig({"x"});
    auto x = Expr::var("x", u64_ty());
    ir::Program prog{Statement::var_decl(std::nullopt, x), Statement::assign(x, uconst(4))};

    Rig tight({"x"});
    tight.cfg.fuel = {2, 4, 2};
    fether::Machine small(tight.cfg);
    auto a = small.run(prog, tight.fresh());
    fether::Machine big(rig.cfg);
    auto b = big.run(prog, rig.fresh());
    REQUIRE(a.kind == ExecOutcome::Kind::Normal);
    REQUIRE(b.kind == ExecOutcome::Kind::Normal);
    CHECK(a.memory == b.memory);
}

TEST_CASE("deploying the sponsor contract loads state, code and layouts") {
    auto d = Deployed::make();

    auto owner = d.m0.cell(d.addr("owner"));
    CHECK(owner.occupied);
    CHECK(owner.env == "smartSponsor");
    CHECK(owner.auth.kind == germ::Auth::Kind::Public);
    CHECK(owner.v == Value::from_literal(ir::Literal::address_lit({})));

    // State variables without an access modifier stay contract-internal.
    auto refund = d.m0.cell(d.addr("refund"));
    CHECK(refund.auth.kind == germ::Auth::Kind::Internal);

    auto pledges = d.m0.cell(d.addr("pledges"));
    REQUIRE(pledges.v.kind() == Value::Kind::MappingV);
    CHECK(pledges.v.map_entry_count() == 0);

    auto code = d.m0.cell(d.addr("pledge()"));
    REQUIRE(code.v.kind() == Value::Kind::StatementV);
    CHECK(code.v.stmt()->kind == Statement::Kind::Fun);
    CHECK(code.auth.kind == germ::Auth::Kind::Public);

    CHECK(d.machine.has_function("pledge"));
    CHECK(d.machine.has_function("refund"));
    CHECK(d.machine.structs().find("Pledge") != nullptr);

    // Contract statement + 8 variables + 1 struct + 4 functions.
    auto redo = fether::Machine(d.cfg).run(d.image.program,
                                           germ::Memory::init(256, d.cfg.lib));
    CHECK(redo.gas_used == 14);
}

TEST_CASE("pledge with zero value throws and restores the entry memory") {
    auto d = Deployed::make();
    auto zero32 = Value::bytes_v(std::vector<uint8_t>(32, 0));

    auto out = d.machine.call("pledge", {zero32}, d.m0);
    REQUIRE(out.kind == ExecOutcome::Kind::Thrown);
    CHECK(out.memory == d.m0);
    CHECK(out.gas_used == 2);  // the guard test, then the throw
}

TEST_CASE("pledge with value five records the pledge and one send") {
    auto d = Deployed::make();
    auto sender = Value::from_literal(
        ir::Literal::address_lit(std::vector<uint8_t>(20, 0x11)));
    auto m = fether::with_special_member(d.m0, ir::SpecialRef::Msg, "values", uv(5),
                                         d.cfg.lib);
    REQUIRE(m);
    m = fether::with_special_member(*m, ir::SpecialRef::Msg, "sender", sender, d.cfg.lib);
    REQUIRE(m);

    auto out = d.machine.call("pledge", {Value::bytes_v(std::vector<uint8_t>(32, 0))}, *m);
    REQUIRE(out.kind == ExecOutcome::Kind::Normal);
    CHECK(out.gas_used == 5);  // guard, untaken nil branch, store, send, increment

    CHECK(out.memory.cell(d.addr("numPledges")).v == uv(1));
    auto pledges = out.memory.cell(d.addr("pledges")).v;
    REQUIRE(pledges.map_entry_count() == 1);
    auto expect = Value::struct_v(
        "Pledge", {uv(5), sender, Value::bytes_v(std::vector<uint8_t>(32, 0))});
    CHECK(pledges.map_get(uv(0)) == expect);

    auto events = out.memory.events();
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == germ::Event::Kind::Send);
    CHECK(events[0].amount == uv(5));
    CHECK(events[0].target == Value::from_literal(ir::Literal::address_lit({})));
    CHECK(events[0].result == true);
}

TEST_CASE("short-circuit evaluation skips the untaken operand's fuel") {
    // The pledge guard with msg.value = 0 takes 5 expression nodes when the
    // first disjunct decides; the full condition would take 7.
    auto d = Deployed::make();
    d.cfg.fuel.k_val = 5;
    fether::Machine tight(d.cfg);
    auto dep = tight.run(d.image.program, germ::Memory::init(256, d.cfg.lib));
    REQUIRE(dep.kind == ExecOutcome::Kind::Normal);
    auto zero32 = Value::bytes_v(std::vector<uint8_t>(32, 0));
    auto out = tight.call("pledge", {zero32}, dep.memory);
    CHECK(out.kind == ExecOutcome::Kind::Thrown);

    d.cfg.fuel.k_val = 4;
    fether::Machine tighter(d.cfg);
    auto dep2 = tighter.run(d.image.program, germ::Memory::init(256, d.cfg.lib));
    REQUIRE(dep2.kind == ExecOutcome::Kind::Normal);
    auto out2 = tighter.call("pledge", {zero32}, dep2.memory);
    REQUIRE(out2.kind == ExecOutcome::Kind::Fault);
    CHECK(out2.fault->kind == FaultKind::ExprFuelExhausted);
}

TEST_CASE("calls pass arguments, discard return values and restore context") {
    auto src = std::string(
        "contract C {\n"
        "    uint s;\n"
        "    function f(uint x) {\n"
        "        s = x + 1;\n"
        "        return;\n"
        "        s = 77;\n"
        "    }\n"
        "}\n");
    auto tr = frontend::translate_source(src, "c.sol", 64);
    REQUIRE(tr.image);
    fether::ExecConfig cfg;
    cfg.lib.uint_bits = 64;
    auto table = tr.image->table;
    cfg.resolve = [table](const std::string& k) { return table.find(k); };
    fether::Machine mach(cfg);
    auto dep = mach.run(tr.image->program, germ::Memory::init(256, cfg.lib));
    REQUIRE(dep.kind == ExecOutcome::Kind::Normal);

    auto out = mach.call("f", {uv(4)}, dep.memory);
    REQUIRE(out.kind == ExecOutcome::Kind::Normal);
    CHECK(out.steps == 2);  // the store and the return; nothing after runs
    auto s_addr = cfg.strategy.map(*table.find("s")).value();
    CHECK(out.memory.cell(s_addr).v == uv(5));
    auto x_addr = cfg.strategy.map(*table.find("f.x")).value();
    CHECK(out.memory.cell(x_addr).v == uv(4));
    CHECK(out.env.scope_depth == 0);  // the return restored the caller context
}

TEST_CASE("unbounded recursion is stopped by the statement budget") {
    auto src = std::string(
        "contract R {\n"
        "    function r() {\n"
        "        r();\n"
        "    }\n"
        "}\n");
    auto tr = frontend::translate_source(src, "r.sol", 64);
    REQUIRE(tr.image);
    fether::ExecConfig cfg;
    cfg.lib.uint_bits = 64;
    cfg.fuel.gas = 1000;
    cfg.fuel.k_stmt = 50;
    auto table = tr.image->table;
    cfg.resolve = [table](const std::string& k) { return table.find(k); };
    fether::Machine mach(cfg);
    auto dep = mach.run(tr.image->program, germ::Memory::init(256, cfg.lib));
    REQUIRE(dep.kind == ExecOutcome::Kind::Normal);
    auto out = mach.call("r", {}, dep.memory);
    REQUIRE(out.kind == ExecOutcome::Kind::OutOfGas);
    CHECK(*out.stop == fether::StopReason::StepBudget);
    CHECK(out.steps == 50);
}

TEST_CASE("stepping reports executed statements and branch decisions") {
    auto d = Deployed::make();
    auto zero32 = Value::bytes_v(std::vector<uint8_t>(32, 0));
    d.machine.start_call("pledge", {zero32}, d.m0);

    auto s1 = d.machine.step();
    REQUIRE(s1.executed);
    CHECK(s1.executed->kind == Statement::Kind::If);
    CHECK(s1.executed->line == 31);
    REQUIRE(s1.branch.has_value());
    CHECK(*s1.branch == true);

    auto s2 = d.machine.step();
    CHECK(s2.finished);
    CHECK(d.machine.outcome().kind == ExecOutcome::Kind::Thrown);
}

TEST_CASE("special cell members bind through the driver helper") {
    germ::StdLib lib{64};
    auto m = germ::Memory::init(32, lib);
    auto bound = fether::with_special_member(m, ir::SpecialRef::Msg, "values", uv(9), lib);
    REQUIRE(bound);
    auto cell = bound->cell(germ::MachineAddress::special(ir::SpecialAddr::Msg));
    CHECK(cell.v.members()[1] == uv(9));
    CHECK(!fether::with_special_member(m, ir::SpecialRef::Msg, "nope", uv(1), lib));
}
