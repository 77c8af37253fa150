// Typed intermediate representation for the Solidity subset: static types,
// label addresses, expressions carrying (input, output) type annotations, and
// goto-free statements. Trees are immutable and shared; factories synthesize
// annotations from children but never reject, so ill-typed trees can be built
// and then diagnosed by the checker in typecheck.cpp.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace fspvm::ir {

using Int = boost::multiprecision::cpp_int;

enum class Sign : uint8_t { Signed, Unsigned };

// The seven reserved cells of the memory model. Closed enumeration: code may
// iterate [0, kSpecialCount) and rely on the order for dumps.
enum class SpecialAddr : uint8_t { Init, Send, SendRe, Call, Msg, Address, Block };
inline constexpr int kSpecialCount = 7;

const char* special_name(SpecialAddr s);  // "_0xinit", "_0xsend", ...
std::optional<SpecialAddr> special_by_name(const std::string& name);

// Abstract address as it appears in translated programs: either one of the
// reserved cells or a numbered slot.
struct LabelAddress {
    bool is_special = false;
    SpecialAddr special = SpecialAddr::Init;
    uint32_t index = 0;

    static LabelAddress numbered(uint32_t i) { return {false, SpecialAddr::Init, i}; }
    static LabelAddress at(SpecialAddr s) { return {true, s, 0}; }
    bool operator==(const LabelAddress& o) const {
        return is_special == o.is_special &&
               (is_special ? special == o.special : index == o.index);
    }
    std::string text() const;  // "_0x0000000a" or the special name
};

// ---------------------------------------------------------------------------
// Types

class LType {
  public:
    enum class Kind : uint8_t {
        Undef, Int, Float, Bool, String, Bytes, Address,
        Array, Mapping, Struct, Fun, Contract,
    };

    LType() : LType(undef()) {}

    static LType undef();
    static LType integer(unsigned bits, Sign sign);  // bits in {8,16,32,64,128,256}
    static LType floating();
    static LType boolean();
    static LType string_ty();
    static LType bytes(unsigned len);  // len in [1,32]
    static LType address();
    static LType array(LType elem, std::optional<uint64_t> len);
    static LType mapping(LType key, LType value);  // key must be scalar
    static LType struct_ty(std::string name);
    static LType fun(std::vector<LType> params, LType ret);
    static LType contract(std::string name);

    Kind kind() const { return n_->kind; }
    unsigned bits() const { return n_->bits; }
    Sign sign() const { return n_->sign; }
    unsigned byte_len() const { return n_->blen; }
    const std::optional<uint64_t>& array_len() const { return n_->alen; }
    const LType& elem() const { return n_->subs[0]; }          // array
    const LType& key() const { return n_->subs[0]; }           // mapping
    const LType& value() const { return n_->subs[1]; }         // mapping
    const std::string& name() const { return n_->name; }       // struct/contract
    const std::vector<LType>& params() const { return n_->subs; }  // fun (last is ret)
    const LType& ret() const { return n_->subs.back(); }
    size_t param_count() const { return n_->subs.size() - 1; }

    bool is_int() const { return kind() == Kind::Int; }
    bool is_bool() const { return kind() == Kind::Bool; }
    // Mapping keys must index by value: int/bool/bytes/address/string.
    bool is_scalar_key() const;

    bool operator==(const LType& o) const;
    bool operator!=(const LType& o) const { return !(*this == o); }

    std::string text() const;  // canonical form, e.g. "(int 64 u)"

  private:
    struct Node {
        Kind kind;
        unsigned bits = 0;
        Sign sign = Sign::Unsigned;
        unsigned blen = 0;
        std::optional<uint64_t> alen;
        std::string name;
        std::vector<LType> subs;
    };
    explicit LType(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
    std::shared_ptr<const Node> n_;
};

bool valid_int_bits(unsigned bits);

// ---------------------------------------------------------------------------
// Literals (the constant subset of runtime values; aggregates are built with
// struct-literal expressions, never as constants)

struct Literal {
    LType ty;  // Undef, Int, Bool, String, Bytes, Address or Float
    bool b = false;
    Int i;                       // reduced mod 2^bits for Int
    double f = 0.0;
    std::string str;
    std::vector<uint8_t> bytes;  // Bytes payload; Address uses 20 bytes

    static Literal undef();
    static Literal boolean(bool v);
    static Literal integer(unsigned bits, Sign s, Int v);
    static Literal floating(double v);
    static Literal string_lit(std::string s);
    static Literal bytes_lit(unsigned len, std::vector<uint8_t> data);  // zero-padded
    static Literal address_lit(std::vector<uint8_t> data20);

    bool operator==(const Literal& o) const;
    std::string text() const;
};

// Reduce v into [0, 2^bits); two's-complement wrap for negatives.
Int wrap_int(const Int& v, unsigned bits);
// Signed reinterpretation of a wrapped magnitude.
Int to_signed(const Int& mag, unsigned bits);

// ---------------------------------------------------------------------------
// Expressions

enum class BinOp : uint8_t { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnOp : uint8_t { Not, Neg, Cast };
enum class SpecialRef : uint8_t { Msg, This, Block };  // field-access bases

const char* binop_text(BinOp op);
const char* special_ref_name(SpecialRef r);  // "msg", "this", "block"
SpecialAddr special_ref_addr(SpecialRef r);

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
  public:
    enum class Kind : uint8_t {
        Const, Var, Fun, Par, Binop, Unop, Field, Index, StructLit,
    };

    Kind kind;
    // Annotation pair: the type the node consumes (its principal operand
    // type) and the type it produces. Stored at construction; the checker
    // re-derives and compares.
    LType in_ty, out_ty;

    Literal lit;                     // Const
    std::string name;                // Var/Par/Fun identifier
    BinOp bop = BinOp::Add;          // Binop
    UnOp uop = UnOp::Not;            // Unop
    ExprPtr a, b;                    // operands; Field base / Index base+key
    bool base_is_special = false;    // Field
    SpecialRef sref = SpecialRef::Msg;
    std::vector<std::string> path;   // Field member path
    std::vector<std::pair<std::string, ExprPtr>> members;  // StructLit

    static ExprPtr constant(Literal v);
    static ExprPtr var(std::string name, LType ty);
    static ExprPtr par(std::string name, LType ty);
    static ExprPtr fun(std::string name, LType ret);
    static ExprPtr binop(BinOp op, ExprPtr l, ExprPtr r);
    static ExprPtr unop(UnOp op, ExprPtr e);            // Not/Neg
    static ExprPtr cast(LType target, ExprPtr e);
    static ExprPtr field(ExprPtr base, std::vector<std::string> path, LType ty);
    static ExprPtr field_special(SpecialRef base, std::vector<std::string> path, LType ty);
    static ExprPtr index(ExprPtr base, ExprPtr key);
    static ExprPtr struct_lit(LType struct_ty,
                              std::vector<std::pair<std::string, ExprPtr>> members);
};

bool equal(const Expr& a, const Expr& b);
bool equal(const ExprPtr& a, const ExprPtr& b);

// ---------------------------------------------------------------------------
// Statements

enum class Visibility : uint8_t { Public, Private, Internal };
const char* visibility_text(Visibility v);

class Statement;
using StmtPtr = std::shared_ptr<const Statement>;
using Program = std::vector<StmtPtr>;

class Statement {
  public:
    enum class Kind : uint8_t {
        Nil, Seq, Var, StructDecl, Assign, If, While, For,
        Fun, FunCall, Return, Throw, Contract,
    };

    Kind kind;
    int line = 0;  // source line; 0 for synthesized nodes. Ignored by equal().

    std::optional<Visibility> vis;               // Var/Fun
    ExprPtr e1, e2;                              // see factories
    StmtPtr s1, s2, s3;                          // see factories
    Program stmts;                               // Seq/Fun body/Contract body
    std::vector<ExprPtr> args;                   // FunCall args / Fun params
    std::string name;                            // StructDecl name
    std::vector<std::pair<LType, std::string>> members;  // StructDecl
    std::vector<std::string> parents;            // Contract

    static StmtPtr nil();
    static StmtPtr seq(Program ss, int line = 0);
    static StmtPtr var_decl(std::optional<Visibility> vis, ExprPtr decl, int line = 0);
    static StmtPtr struct_decl(std::string name,
                               std::vector<std::pair<LType, std::string>> members,
                               int line = 0);
    static StmtPtr assign(ExprPtr lhs, ExprPtr rhs, int line = 0);
    static StmtPtr if_(ExprPtr cond, StmtPtr then_s, StmtPtr else_s, int line = 0);
    static StmtPtr while_(ExprPtr cond, StmtPtr body, int line = 0);
    static StmtPtr for_(StmtPtr init, ExprPtr cond, StmtPtr step, StmtPtr body,
                        int line = 0);
    static StmtPtr fun(std::optional<Visibility> vis, ExprPtr sig,
                       std::vector<ExprPtr> params, Program body, int line = 0);
    static StmtPtr fun_call(ExprPtr callee, std::vector<ExprPtr> args, int line = 0);
    static StmtPtr ret(ExprPtr value_or_null, int line = 0);
    static StmtPtr throw_(int line = 0);
    static StmtPtr contract(ExprPtr name, std::vector<std::string> parents,
                            Program body, int line = 0);

    // If: e1 cond, s1 then, s2 else. While: e1 cond, s1 body.
    // For: s1 init, e1 cond, s2 step, s3 body. Assign: e1 lhs, e2 rhs.
    // Var: e1 decl. Fun: e1 signature (Fun expr), args params, stmts body.
    // FunCall: e1 callee, args. Return: e1 value or null. Contract: e1 name.
};

bool equal(const Statement& a, const Statement& b);
bool equal(const StmtPtr& a, const StmtPtr& b);
bool equal(const Program& a, const Program& b);

// Stable 64-bit content hash of canonical statement text (FNV-1a); used to
// key verification summaries. Collisions are harmless: consumers confirm with
// structural equality before acting on a hash match.
uint64_t content_hash(const Program& block);

// ---------------------------------------------------------------------------
// Typing context and reports

using StructLayout = std::vector<std::pair<std::string, LType>>;

struct StructRegistry {
    // Declaration order is preserved per layout; lookups by name.
    std::map<std::string, StructLayout> layouts;

    const StructLayout* find(const std::string& name) const;
    const LType* member(const std::string& layout, const std::string& field) const;
    std::optional<size_t> member_index(const std::string& layout,
                                       const std::string& field) const;
};

struct TypeContext {
    std::map<std::string, LType> vars;  // identifier -> declared type
    std::map<std::string, LType> funs;  // identifier -> Tfun
    StructRegistry structs;
    // Layouts of the reserved msg/this/block cells, keyed by base name.
    std::map<std::string, StructLayout> special_layouts;
};

enum class TypeErrorCode : uint8_t {
    UnboundIdentifier, TypeMismatch, ConditionNotBool, AssignTypeMismatch,
    ArityMismatch,
};
const char* type_error_text(TypeErrorCode c);

struct TypeError {
    TypeErrorCode code;
    std::string path;      // node path, e.g. "stmt[0].cond"
    std::string message;
    std::optional<LType> expected, found;
};

struct TypeReport {
    bool well_typed = true;
    std::optional<TypeError> error;
};

// Post-order (leftmost-innermost) check; the first violating node wins.
// On success yields the expression's output type.
struct ExprCheck {
    std::optional<LType> ty;
    std::optional<TypeError> error;
};
ExprCheck typecheck_expr(const ExprPtr& e, const TypeContext& ctx);
TypeReport typecheck_stmt(const StmtPtr& s, const TypeContext& ctx);
TypeReport typecheck_program(const Program& p, const TypeContext& ctx);

}  // namespace fspvm::ir
