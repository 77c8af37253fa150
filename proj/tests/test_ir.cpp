#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fspvm/ir.hpp"

using namespace fspvm;

TEST_CASE("integer widths are the fixed ladder") {
    for (unsigned b : {8u, 16u, 32u, 64u, 128u, 256u}) CHECK(ir::valid_int_bits(b));
    for (unsigned b : {0u, 1u, 7u, 24u, 48u, 96u, 512u}) CHECK(!ir::valid_int_bits(b));
    CHECK_THROWS(ir::LType::integer(24, ir::Sign::Unsigned));
    CHECK_THROWS(ir::LType::bytes(0));
    CHECK_THROWS(ir::LType::bytes(33));
}

TEST_CASE("mapping keys must be scalar") {
    ir::LType uint64 = ir::LType::integer(64, ir::Sign::Unsigned);
    CHECK(uint64.is_scalar_key());
    CHECK(ir::LType::address().is_scalar_key());
    CHECK(ir::LType::bytes(32).is_scalar_key());
    CHECK(!ir::LType::struct_ty("P").is_scalar_key());
    CHECK_THROWS(ir::LType::mapping(ir::LType::struct_ty("P"), uint64));
}

TEST_CASE("type equality is structural and text is canonical") {
    ir::LType a = ir::LType::mapping(ir::LType::integer(64, ir::Sign::Unsigned),
                                     ir::LType::struct_ty("Pledge"));
    ir::LType b = ir::LType::mapping(ir::LType::integer(64, ir::Sign::Unsigned),
                                     ir::LType::struct_ty("Pledge"));
    CHECK(a == b);
    CHECK(a.text() == "(mapping (int 64 u) (struct Pledge))");
    CHECK(ir::LType::integer(8, ir::Sign::Signed).text() == "(int 8 s)");
    CHECK(ir::LType::fun({ir::LType::address()}, ir::LType::boolean()).text() ==
          "(fn (address) bool)");
}

TEST_CASE("integer wrapping is two's-complement") {
    CHECK(ir::wrap_int(ir::Int(-1), 8) == 255);
    CHECK(ir::wrap_int(ir::Int(256), 8) == 0);
    CHECK(ir::wrap_int(ir::Int(300), 8) == 44);
    CHECK(ir::to_signed(ir::Int(255), 8) == -1);
    CHECK(ir::to_signed(ir::Int(127), 8) == 127);
    CHECK(ir::to_signed(ir::Int(128), 8) == -128);

    ir::Literal l = ir::Literal::integer(8, ir::Sign::Unsigned, ir::Int(-1));
    CHECK(l.i == 255);
}

TEST_CASE("address literals are twenty bytes") {
    ir::Literal a = ir::Literal::address_lit({0xde, 0xad});
    CHECK(a.bytes.size() == 20);
    ir::Literal b = ir::Literal::bytes_lit(4, {0xff});
    CHECK(b.bytes.size() == 4);
}

TEST_CASE("special cells have stable names") {
    CHECK(std::string(ir::special_name(ir::SpecialAddr::Init)) == "_0xinit");
    CHECK(std::string(ir::special_name(ir::SpecialAddr::SendRe)) == "_0xsend_re");
    CHECK(ir::special_by_name("_0xmsg") == ir::SpecialAddr::Msg);
    CHECK(!ir::special_by_name("_0xnothing"));
    CHECK(ir::kSpecialCount == 7);
}

TEST_CASE("label address text is zero-padded hex") {
    CHECK(ir::LabelAddress::numbered(10).text() == "_0x0000000a");
    CHECK(ir::LabelAddress::at(ir::SpecialAddr::Send).text() == "_0xsend");
}

namespace {

ir::ExprPtr uvar(const char* name, unsigned bits = 64) {
    return ir::Expr::var(name, ir::LType::integer(bits, ir::Sign::Unsigned));
}

ir::ExprPtr ulit(uint64_t v, unsigned bits = 64) {
    return ir::Expr::constant(
        ir::Literal::integer(bits, ir::Sign::Unsigned, ir::Int(v)));
}

}  // namespace

TEST_CASE("expression factories synthesize annotations") {
    ir::ExprPtr cmp = ir::Expr::binop(ir::BinOp::Lt, uvar("x"), ulit(3));
    CHECK(cmp->out_ty == ir::LType::boolean());
    CHECK(cmp->in_ty == uvar("x")->out_ty);

    ir::ExprPtr sum = ir::Expr::binop(ir::BinOp::Add, uvar("x"), ulit(3));
    CHECK(sum->out_ty == uvar("x")->out_ty);

    ir::ExprPtr c = ir::Expr::cast(ir::LType::integer(8, ir::Sign::Unsigned), uvar("x"));
    CHECK(c->out_ty == ir::LType::integer(8, ir::Sign::Unsigned));
    CHECK(c->in_ty == uvar("x")->out_ty);
}

TEST_CASE("statement equality ignores lines, not structure") {
    ir::StmtPtr a = ir::Statement::assign(uvar("x"), ulit(1), 3);
    ir::StmtPtr b = ir::Statement::assign(uvar("x"), ulit(1), 99);
    ir::StmtPtr c = ir::Statement::assign(uvar("x"), ulit(2), 3);
    CHECK(ir::equal(a, b));
    CHECK(!ir::equal(a, c));

    ir::StmtPtr w1 = ir::Statement::while_(
        ir::Expr::binop(ir::BinOp::Lt, uvar("x"), ulit(3)), a, 1);
    ir::StmtPtr w2 = ir::Statement::while_(
        ir::Expr::binop(ir::BinOp::Lt, uvar("x"), ulit(3)), b, 2);
    CHECK(ir::equal(w1, w2));
}

TEST_CASE("content hash is stable across lines and sensitive to structure") {
    ir::Program p1 = {ir::Statement::assign(uvar("x"), ulit(1), 3)};
    ir::Program p2 = {ir::Statement::assign(uvar("x"), ulit(1), 70)};
    ir::Program p3 = {ir::Statement::assign(uvar("x"), ulit(2), 3)};
    CHECK(ir::content_hash(p1) == ir::content_hash(p2));
    CHECK(ir::content_hash(p1) != ir::content_hash(p3));
}

namespace {

ir::TypeContext small_ctx() {
    ir::TypeContext ctx;
    ctx.vars["x"] = ir::LType::integer(64, ir::Sign::Unsigned);
    ctx.vars["flag"] = ir::LType::boolean();
    return ctx;
}

}  // namespace

TEST_CASE("checker accepts a well-typed program") {
    ir::Program p = {
        ir::Statement::assign(uvar("x"), ulit(5)),
        ir::Statement::if_(ir::Expr::var("flag", ir::LType::boolean()),
                           ir::Statement::assign(uvar("x"), ulit(1)),
                           ir::Statement::nil()),
    };
    ir::TypeReport r = ir::typecheck_program(p, small_ctx());
    CHECK(r.well_typed);
}

TEST_CASE("checker reports the path to a non-boolean condition") {
    ir::Program p = {
        ir::Statement::if_(uvar("x"), ir::Statement::nil(), ir::Statement::nil()),
    };
    ir::TypeReport r = ir::typecheck_program(p, small_ctx());
    REQUIRE(!r.well_typed);
    CHECK(r.error->code == ir::TypeErrorCode::ConditionNotBool);
    CHECK(r.error->path == "stmt[0].cond");
}

TEST_CASE("checker reports unbound identifiers by path") {
    ir::Program p = {ir::Statement::assign(uvar("nope"), ulit(5))};
    ir::TypeReport r = ir::typecheck_program(p, small_ctx());
    REQUIRE(!r.well_typed);
    CHECK(r.error->code == ir::TypeErrorCode::UnboundIdentifier);
    CHECK(r.error->path == "stmt[0].lhs");
}

TEST_CASE("checker rejects mismatched assignment") {
    ir::Program p = {
        ir::Statement::assign(uvar("x"),
                              ir::Expr::constant(ir::Literal::boolean(true)))};
    ir::TypeReport r = ir::typecheck_program(p, small_ctx());
    REQUIRE(!r.well_typed);
    CHECK(r.error->code == ir::TypeErrorCode::AssignTypeMismatch);
}

TEST_CASE("checker validates annotations against declarations") {
    ir::Program p = {ir::Statement::assign(uvar("x", 8), ulit(1, 8))};
    ir::TypeReport r = ir::typecheck_program(p, small_ctx());
    REQUIRE(!r.well_typed);
    CHECK(r.error->code == ir::TypeErrorCode::TypeMismatch);
}

TEST_CASE("checker walks struct layouts through member paths") {
    ir::TypeContext ctx = small_ctx();
    ctx.structs.layouts["P"] = {
        {"amount", ir::LType::integer(64, ir::Sign::Unsigned)},
        {"who", ir::LType::address()},
    };
    ctx.vars["p"] = ir::LType::struct_ty("P");

    ir::ExprPtr good = ir::Expr::field(ir::Expr::var("p", ir::LType::struct_ty("P")),
                                       {"amount"},
                                       ir::LType::integer(64, ir::Sign::Unsigned));
    CHECK(ir::typecheck_expr(good, ctx).ty.has_value());

    ir::ExprPtr bad = ir::Expr::field(ir::Expr::var("p", ir::LType::struct_ty("P")),
                                      {"missing"},
                                      ir::LType::integer(64, ir::Sign::Unsigned));
    auto r = ir::typecheck_expr(bad, ctx);
    REQUIRE(r.error.has_value());
    CHECK(r.error->code == ir::TypeErrorCode::UnboundIdentifier);
}

TEST_CASE("call arity is checked") {
    ir::TypeContext ctx = small_ctx();
    ctx.funs["f"] = ir::LType::fun({ir::LType::integer(64, ir::Sign::Unsigned)},
                                   ir::LType::undef());
    ir::StmtPtr call = ir::Statement::fun_call(
        ir::Expr::fun("f", ir::LType::undef()), {});
    ir::TypeReport r = ir::typecheck_stmt(call, ctx);
    REQUIRE(!r.well_typed);
    CHECK(r.error->code == ir::TypeErrorCode::ArityMismatch);
}
