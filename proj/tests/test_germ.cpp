#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fspvm/germ.hpp"

using namespace fspvm;
using germ::Memory;
using germ::Value;

static_assert(Value::kVariantCount == 14, "the value space is a fixed closed set");

namespace {

ir::LType uint64_ty() { return ir::LType::integer(64, ir::Sign::Unsigned); }

Value uv(uint64_t v) { return Value::integer(64, ir::Sign::Unsigned, ir::Int(v)); }

germ::StdLib lib64() { return germ::StdLib{64}; }

}  // namespace

TEST_CASE("integer values wrap at their width") {
    Value v = Value::integer(8, ir::Sign::Unsigned, ir::Int(300));
    CHECK(v.int_mag() == 44);
    Value n = Value::integer(8, ir::Sign::Signed, ir::Int(-1));
    CHECK(n.int_mag() == 255);
    CHECK(n.int_signed() == -1);
}

TEST_CASE("zero_value covers every storable type") {
    ir::StructRegistry structs;
    structs.layouts["P"] = {{"a", uint64_ty()}, {"who", ir::LType::address()}};

    auto z = germ::zero_value(uint64_ty(), structs);
    REQUIRE(z);
    CHECK(z->int_mag() == 0);

    auto addr = germ::zero_value(ir::LType::address(), structs);
    REQUIRE(addr);
    CHECK(addr->bytes_val() == std::vector<uint8_t>(20, 0));

    auto st = germ::zero_value(ir::LType::struct_ty("P"), structs);
    REQUIRE(st);
    CHECK(st->members().size() == 2);
    CHECK(st->members()[0] == uv(0));

    auto map = germ::zero_value(ir::LType::mapping(uint64_ty(), uint64_ty()), structs);
    REQUIRE(map);
    CHECK(map->map_entry_count() == 0);

    CHECK(!germ::zero_value(ir::LType::undef(), structs));
    CHECK(!germ::zero_value(ir::LType::fun({}, ir::LType::undef()), structs));
}

TEST_CASE("mapping entries equal to the default are canonically absent") {
    ir::StructRegistry structs;
    Value m = *germ::zero_value(ir::LType::mapping(uint64_ty(), uint64_ty()), structs);

    Value m1 = m.map_set(uv(3), uv(7));
    CHECK(m1.map_entry_count() == 1);
    CHECK(m1.map_get(uv(3)) == uv(7));
    CHECK(m1.map_get(uv(4)) == uv(0));

    Value m2 = m1.map_set(uv(3), uv(0));
    CHECK(m2.map_entry_count() == 0);
    CHECK(m2 == m);

    Value direct = m.map_set(uv(9), uv(0));
    CHECK(direct == m);
}

TEST_CASE("mapping keys keep a canonical order") {
    ir::StructRegistry structs;
    Value m = *germ::zero_value(ir::LType::mapping(uint64_ty(), uint64_ty()), structs);
    Value a = m.map_set(uv(5), uv(50)).map_set(uv(1), uv(10));
    Value b = m.map_set(uv(1), uv(10)).map_set(uv(5), uv(50));
    CHECK(a == b);
    CHECK(a.map_entry_key(0) == uv(1));
    CHECK(a.map_entry_key(1) == uv(5));
}

TEST_CASE("value text is one line per value") {
    CHECK(uv(5).text() == "(int 64 u 5)");
    CHECK(Value::boolean(true).text() == "true");
    CHECK(Value::undef().text() == "undef");
    CHECK(Value::bytes_v({0xde, 0xad}).text() == "0xdead");
    CHECK(Value::ptr_fun(ir::LabelAddress::at(ir::SpecialAddr::Send)).text() ==
          "(ptr-fun _0xsend)");
}

TEST_CASE("persistent array shares structure across updates") {
    germ::PArray<int> a(1000);
    germ::PArray<int> b = a.set(512, 42);
    CHECK(a.get(512) == 0);
    CHECK(b.get(512) == 42);
    CHECK(b.get(511) == 0);
    germ::PArray<int> c = b.set(512, 42);
    CHECK(c.equal(b, [](int x, int y) { return x == y; }));
}

TEST_CASE("memory init shapes the reserved cells") {
    Memory m = Memory::init(16, lib64());
    CHECK(m.space() == 16);
    CHECK(!m.throw_flag());

    const germ::MemoryCell& msg =
        m.cell(germ::MachineAddress::special(ir::SpecialAddr::Msg));
    REQUIRE(msg.occupied);
    CHECK(msg.v.layout() == "msg");
    CHECK(msg.v.members()[0].bytes_val() == std::vector<uint8_t>(20, 0));
    CHECK(msg.v.members()[1] == uv(0));

    const germ::MemoryCell& self =
        m.cell(germ::MachineAddress::special(ir::SpecialAddr::Address));
    REQUIRE(self.occupied);
    CHECK(self.v.members()[2] ==
          Value::ptr_fun(ir::LabelAddress::at(ir::SpecialAddr::Send)));

    const germ::MemoryCell& numbered = m.cell(germ::MachineAddress::numbered(0));
    CHECK(!numbered.occupied);
    CHECK(numbered.v.is_undef());
}

TEST_CASE("write leaves the source memory untouched") {
    Memory m0 = Memory::init(8, lib64());
    auto w = m0.write(germ::MachineAddress::numbered(2), uv(7), "c", "c");
    REQUIRE(w.ok_p());
    Memory m1 = w.value();
    CHECK(m0.cell(germ::MachineAddress::numbered(2)).v.is_undef());
    CHECK(m1.cell(germ::MachineAddress::numbered(2)).v == uv(7));
    CHECK(m0 != m1);
}

TEST_CASE("reads respect the authorization tag") {
    Memory m = Memory::init(8, lib64());
    germ::MemoryCell c;
    c.v = uv(1);
    c.occupied = true;
    c.env = "owner_env";
    c.auth.kind = germ::Auth::Kind::Internal;
    m = m.write_cell(germ::MachineAddress::numbered(0), c);

    CHECK(m.read(germ::MachineAddress::numbered(0), "owner_env", "x").ok_p());
    CHECK(m.read(germ::MachineAddress::numbered(0), "y", "owner_env").ok_p());
    auto denied = m.read(germ::MachineAddress::numbered(0), "y", "z");
    REQUIRE(!denied.ok_p());
    CHECK(denied.error().code == germ::MemError::Code::AuthDenied);

    germ::MemoryCell o;
    o.v = uv(2);
    o.occupied = true;
    o.auth.kind = germ::Auth::Kind::Owner;
    o.auth.owner = "only_me";
    m = m.write_cell(germ::MachineAddress::numbered(1), o);
    CHECK(m.read(germ::MachineAddress::numbered(1), "only_me", "").ok_p());
    CHECK(!m.read(germ::MachineAddress::numbered(1), "someone", "only_me").ok_p());
}

TEST_CASE("out-of-domain access fails cleanly") {
    Memory m = Memory::init(4, lib64());
    auto r = m.read(germ::MachineAddress::numbered(4), "e", "e");
    REQUIRE(!r.ok_p());
    CHECK(r.error().code == germ::MemError::Code::OutOfDomain);
    CHECK(!m.write(germ::MachineAddress::numbered(99), uv(0), "e", "e").ok_p());
}

TEST_CASE("allocate is first-fit and free recycles") {
    Memory m = Memory::init(3, lib64());
    auto a0 = m.allocate("e", "e");
    REQUIRE(a0.ok_p());
    CHECK(a0.value().second == germ::MachineAddress::numbered(0));
    Memory m1 = a0.value().first;
    auto a1 = m1.allocate("e", "e");
    REQUIRE(a1.ok_p());
    CHECK(a1.value().second == germ::MachineAddress::numbered(1));
    Memory m2 = a1.value().first;

    auto f = m2.free_cell(germ::MachineAddress::numbered(0));
    REQUIRE(f.ok_p());
    auto a2 = f.value().allocate("e", "e");
    REQUIRE(a2.ok_p());
    CHECK(a2.value().second == germ::MachineAddress::numbered(0));

    CHECK(!m2.free_cell(germ::MachineAddress::numbered(2)).ok_p());

    Memory full = m2;
    auto a3 = full.allocate("e", "e");
    REQUIRE(a3.ok_p());
    auto exhausted = a3.value().first.allocate("e", "e");
    REQUIRE(!exhausted.ok_p());
    CHECK(exhausted.error().code == germ::MemError::Code::Exhausted);
}

TEST_CASE("offset stays inside numbered cells") {
    Memory m = Memory::init(8, lib64());
    auto ok = m.offset(germ::MachineAddress::numbered(3), 2);
    REQUIRE(ok.ok_p());
    CHECK(ok.value() == germ::MachineAddress::numbered(5));
    CHECK(!m.offset(germ::MachineAddress::numbered(3), -4).ok_p());
    CHECK(!m.offset(germ::MachineAddress::numbered(7), 1).ok_p());
    CHECK(!m.offset(germ::MachineAddress::special(ir::SpecialAddr::Msg), 1).ok_p());
}

TEST_CASE("search walks reserved cells before numbered ones") {
    Memory m = Memory::init(8, lib64());
    auto hit = m.search([](germ::MachineAddress, const germ::MemoryCell& c) {
        return c.occupied;
    });
    REQUIRE(hit);
    CHECK(hit->is_special());
}

TEST_CASE("label mapping is bounds-checked identity") {
    germ::MapStrategy strat;
    strat.space = 16;
    auto a = germ::map_label(ir::LabelAddress::numbered(10), strat);
    REQUIRE(a.ok_p());
    CHECK(a.value() == germ::MachineAddress::numbered(10));
    auto s = germ::map_label(ir::LabelAddress::at(ir::SpecialAddr::Block), strat);
    REQUIRE(s.ok_p());
    CHECK(s.value() == germ::MachineAddress::special(ir::SpecialAddr::Block));
    CHECK(!germ::map_label(ir::LabelAddress::numbered(16), strat).ok_p());
}

TEST_CASE("events ride the memory snapshot") {
    Memory m = Memory::init(4, lib64());
    germ::Event e;
    e.kind = germ::Event::Kind::Send;
    e.target = Value::bytes_v(std::vector<uint8_t>(20, 1));
    e.amount = uv(5);
    e.result = true;
    Memory m1 = m.push_event(e);
    CHECK(m.event_count() == 0);
    CHECK(m1.event_count() == 1);
    CHECK(m1.events()[0] == e);
    CHECK(m != m1);

    germ::Event e2 = e;
    e2.result = false;
    CHECK(m.push_event(e) == m.push_event(e));
    CHECK(m.push_event(e) != m.push_event(e2));
}

TEST_CASE("dump starts with the throw flag and lists cells in order") {
    Memory m = Memory::init(2, lib64());
    std::string d = m.dump();
    CHECK(d.rfind("throw := false\n", 0) == 0);
    CHECK(d.find("_0xinit := ") != std::string::npos);
    CHECK(d.find("_0x00000000 := ") != std::string::npos);
    CHECK(d.find("_0x00000001 := ") != std::string::npos);

    size_t init_at = d.find("_0xinit");
    size_t msg_at = d.find("_0xmsg");
    size_t n0_at = d.find("_0x00000000");
    CHECK(init_at < msg_at);
    CHECK(msg_at < n0_at);

    Memory thrown = m.with_throw(true);
    CHECK(thrown.dump().rfind("throw := true\n", 0) == 0);
    CHECK(m != thrown);
}

TEST_CASE("memory equality is structural") {
    Memory a = Memory::init(8, lib64());
    Memory b = Memory::init(8, lib64());
    CHECK(a == b);
    Memory c = a.write(germ::MachineAddress::numbered(0), uv(1), "e", "e").value();
    Memory d = b.write(germ::MachineAddress::numbered(0), uv(1), "e", "e").value();
    CHECK(c == d);
    CHECK(a != c);
}
