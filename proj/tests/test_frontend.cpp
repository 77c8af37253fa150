#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fspvm/frontend.hpp"

using namespace fspvm;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string corpus(const std::string& name) {
    return read_file(std::string(FSPVM_CORPUS_DIR) + "/" + name);
}

frontend::ProgramImage ssc_image() {
    auto r = frontend::translate_source(corpus("ssc.sol"), "ssc.sol", 64);
    if (r.error) INFO(r.error->text());
    REQUIRE(r.image);
    return *r.image;
}

}  // namespace

TEST_CASE("lexer splits digraphs and tracks lines") {
    auto r = frontend::lex("a ||\nb != 3; // gone\nc");
    REQUIRE(!r.error);
    REQUIRE(r.tokens.size() == 8);  // a || b != 3 ; c <end>
    CHECK(r.tokens[1].text == "||");
    CHECK(r.tokens[1].line == 1);
    CHECK(r.tokens[3].text == "!=");
    CHECK(r.tokens[3].line == 2);
    CHECK(r.tokens[6].line == 3);
}

TEST_CASE("parser keeps source precedence") {
    auto r = frontend::translate_source(
        "contract t { uint x; bool b; function f() { b = x + 2 * 3 == x || b; } }",
        "t.sol", 64);
    if (r.error) INFO(r.error->text());
    REQUIRE(r.image);
    const ir::Program& body = r.image->functions.at("f").body;
    REQUIRE(body.size() == 1);
    // or(eq(add(x, mul(2,3)), x), b)
    const ir::ExprPtr& rhs = body[0]->e2;
    REQUIRE(rhs->kind == ir::Expr::Kind::Binop);
    CHECK(rhs->bop == ir::BinOp::Or);
    CHECK(rhs->a->bop == ir::BinOp::Eq);
    CHECK(rhs->a->a->bop == ir::BinOp::Add);
    CHECK(rhs->a->a->b->bop == ir::BinOp::Mul);
}

TEST_CASE("inline assembly is rejected as unsupported") {
    auto r = frontend::translate_source(
        "contract t { function f() { assembly { pop } } }", "t.sol", 64);
    REQUIRE(r.error);
    CHECK(r.error->kind == frontend::FrontendError::Kind::Unsupported);
}

TEST_CASE("transfer result inside a compound condition is rejected") {
    auto r = frontend::translate_source(
        "contract t { address a; function f() { if (a.send(1) && true) throw; } }",
        "t.sol", 64);
    REQUIRE(r.error);
    CHECK(r.error->kind == frontend::FrontendError::Kind::Unsupported);
}

TEST_CASE("the pledge contract translates") {
    frontend::ProgramImage img = ssc_image();
    CHECK(img.contract_name == "smartSponsor");
    CHECK(img.uint_bits == 64);
    CHECK(img.state_vars ==
          std::vector<std::string>{"owner", "benefactor", "refunded", "complete",
                                   "refund", "drwbck", "numPledges", "pledges"});
    REQUIRE(img.functions.count("smartSponsor"));
    CHECK(img.functions.at("smartSponsor").is_constructor);
    CHECK(!img.functions.at("pledge").is_constructor);
}

TEST_CASE("address assignment follows declaration order") {
    frontend::ProgramImage img = ssc_image();
    auto at = [&](const char* key) {
        auto a = img.table.find(key);
        REQUIRE(a);
        return a->index;
    };
    CHECK(at("owner") == 0x0a);
    CHECK(at("benefactor") == 0x0b);
    CHECK(at("refunded") == 0x0c);
    CHECK(at("complete") == 0x0d);
    CHECK(at("refund") == 0x0e);
    CHECK(at("drwbck") == 0x0f);
    CHECK(at("numPledges") == 0x10);
    CHECK(at("Pledge") == 0x11);
    CHECK(at("pledges") == 0x12);
    CHECK(at("smartSponsor") == 0x13);
    CHECK(at("smartSponsor()") == 0x14);
    CHECK(at("smartSponsor._benefactor") == 0x15);
    CHECK(at("pledge()") == 0x16);
    CHECK(at("pledge._message") == 0x17);
    CHECK(at("refund()") == 0x18);
    CHECK(at("refund.i") == 0x19);
    CHECK(at("drawdown()") == 0x1a);
    CHECK(img.table.size() == 17);
}

TEST_CASE("the translated pledge contract is well-typed") {
    frontend::ProgramImage img = ssc_image();
    ir::TypeReport r = ir::typecheck_program(img.program, img.ctx);
    if (!r.well_typed) INFO(r.error->path << ": " << r.error->message);
    CHECK(r.well_typed);
}

TEST_CASE("statement counts per body match the source") {
    frontend::ProgramImage img = ssc_image();
    CHECK(img.functions.at("smartSponsor").body.size() == 7);
    CHECK(img.functions.at("pledge").body.size() == 4);
    CHECK(img.functions.at("refund").body.size() == 7);
    CHECK(img.functions.at("drawdown").body.size() == 4);
}

TEST_CASE("source lines survive translation") {
    frontend::ProgramImage img = ssc_image();
    const ir::Program& pledge = img.functions.at("pledge").body;
    CHECK(pledge[0]->line == 31);  // the guard
    CHECK(pledge[1]->line == 32);  // the mapping write
    CHECK(pledge[2]->line == 33);  // the send
    CHECK(pledge[3]->line == 34);  // the increment
}

TEST_CASE("a transfer statement lowers to the send builtin") {
    frontend::ProgramImage img = ssc_image();
    const ir::StmtPtr& send = img.functions.at("pledge").body[2];
    REQUIRE(send->kind == ir::Statement::Kind::FunCall);
    CHECK(send->e1->name == germ::kSendBuiltin);
    REQUIRE(send->args.size() == 2);
    CHECK(send->args[0]->out_ty == ir::LType::address());
    CHECK(send->args[1]->out_ty == ir::LType::integer(64, ir::Sign::Unsigned));
}

TEST_CASE("a transfer condition lowers to a call plus result branch") {
    frontend::ProgramImage img = ssc_image();
    const ir::StmtPtr& gated = img.functions.at("drawdown").body[3];
    REQUIRE(gated->kind == ir::Statement::Kind::Seq);
    REQUIRE(gated->stmts.size() == 2);
    CHECK(gated->stmts[0]->kind == ir::Statement::Kind::FunCall);
    CHECK(gated->stmts[0]->e1->name == germ::kSendBuiltin);
    REQUIRE(gated->stmts[1]->kind == ir::Statement::Kind::If);
    CHECK(gated->stmts[1]->e1->name == germ::kSendResultVar);
}

TEST_CASE("increments lower to assignments") {
    frontend::ProgramImage img = ssc_image();
    const ir::StmtPtr& inc = img.functions.at("pledge").body[3];
    REQUIRE(inc->kind == ir::Statement::Kind::Assign);
    REQUIRE(inc->e2->kind == ir::Expr::Kind::Binop);
    CHECK(inc->e2->bop == ir::BinOp::Add);
}

TEST_CASE("a declaration with initializer becomes one sequence") {
    frontend::ProgramImage img = ssc_image();
    const ir::StmtPtr& decl = img.functions.at("refund").body[0];
    REQUIRE(decl->kind == ir::Statement::Kind::Seq);
    REQUIRE(decl->stmts.size() == 2);
    CHECK(decl->stmts[0]->kind == ir::Statement::Kind::Var);
    CHECK(decl->stmts[1]->kind == ir::Statement::Kind::Assign);
    // int i = numPledges - 1 narrows through an explicit width cast
    CHECK(decl->stmts[1]->e2->kind == ir::Expr::Kind::Unop);
    CHECK(decl->stmts[1]->e2->uop == ir::UnOp::Cast);
}

TEST_CASE("mapping reads through a signed index insert a cast") {
    frontend::ProgramImage img = ssc_image();
    const ir::StmtPtr& loop = img.functions.at("refund").body[4];
    REQUIRE(loop->kind == ir::Statement::Kind::While);
    const ir::StmtPtr& body = loop->s1;
    REQUIRE(body->kind == ir::Statement::Kind::Seq);
    // the loop body is the lowered send-guard sequence
    const ir::StmtPtr& inner = body->stmts[0];
    REQUIRE(inner->kind == ir::Statement::Kind::Seq);
    const ir::StmtPtr& call = inner->stmts[0];
    REQUIRE(call->kind == ir::Statement::Kind::FunCall);
    const ir::ExprPtr& target = call->args[0];
    REQUIRE(target->kind == ir::Expr::Kind::Field);
    REQUIRE(target->a->kind == ir::Expr::Kind::Index);
    CHECK(target->a->b->kind == ir::Expr::Kind::Unop);
    CHECK(target->a->b->uop == ir::UnOp::Cast);
}

TEST_CASE("require lowers to a guarded throw") {
    auto r = frontend::translate_source(
        "contract t { uint x; function f() { require(x < 5); x = 1; } }", "t.sol",
        64);
    REQUIRE(r.image);
    const ir::Program& body = r.image->functions.at("f").body;
    REQUIRE(body.size() == 2);
    REQUIRE(body[0]->kind == ir::Statement::Kind::If);
    CHECK(body[0]->e1->kind == ir::Expr::Kind::Unop);
    CHECK(body[0]->s1->kind == ir::Statement::Kind::Throw);
    CHECK(body[0]->s2->kind == ir::Statement::Kind::Nil);
}

TEST_CASE("canonical text round-trips") {
    frontend::ProgramImage img = ssc_image();
    std::string text = frontend::pretty(img.program);
    auto back = frontend::read_program(text);
    if (back.error) INFO(back.error->text());
    REQUIRE(back.program);
    CHECK(ir::equal(*back.program, img.program));
    CHECK(frontend::pretty(*back.program) == text);
    CHECK(ir::content_hash(*back.program) == ir::content_hash(img.program));
}

TEST_CASE("reader context makes reread programs checkable") {
    frontend::ProgramImage img = ssc_image();
    auto back = frontend::read_program(frontend::pretty(img.program));
    REQUIRE(back.program);
    ir::TypeContext ctx = frontend::build_context(*back.program, 64);
    ir::TypeReport r = ir::typecheck_program(*back.program, ctx);
    if (!r.well_typed) INFO(r.error->path << ": " << r.error->message);
    CHECK(r.well_typed);
}

TEST_CASE("address table serialization round-trips") {
    frontend::ProgramImage img = ssc_image();
    std::string text = img.table.serialize();
    auto back = frontend::AddressTable::parse(text);
    REQUIRE(back);
    CHECK(*back == img.table);
    CHECK(text.find("owner 0x0000000a\n") != std::string::npos);
}

TEST_CASE("single-line statement text is compact") {
    auto r = frontend::translate_source(
        "contract t { uint x; function f() { x = 1; } }", "t.sol", 64);
    REQUIRE(r.image);
    std::string line =
        frontend::line_text(r.image->functions.at("f").body[0]);
    CHECK(line ==
          "(assign (var x (int 64 u)) (const (int 64 u) 1))");
    CHECK(line.find('\n') == std::string::npos);
}

TEST_CASE("table rebuilt from IR matches the translator's numbering") {
    frontend::ProgramImage img = ssc_image();
    auto rebuilt = frontend::build_table(img.program);
    CHECK(rebuilt == img.table);
}
