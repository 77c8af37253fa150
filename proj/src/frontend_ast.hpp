// Surface syntax tree for the contract-language subset; produced by the
// parser, consumed by the translator. Names and types are unresolved here:
// resolution and width selection happen during translation.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fspvm/frontend.hpp"

namespace fspvm::frontend::ast {

struct TypeRef;
using TypeRefP = std::shared_ptr<const TypeRef>;

struct TypeRef {
    enum class K : uint8_t { Named, Mapping, Array };
    K kind = K::Named;
    std::string name;          // Named: "uint", "uint64", "bool", "bytes32", "Pledge"
    TypeRefP key, val;         // Mapping
    TypeRefP elem;             // Array
    std::optional<uint64_t> len;
    int line = 0;
};

struct Expr;
using ExprP = std::shared_ptr<const Expr>;

struct Expr {
    enum class K : uint8_t {
        Number, Bool, StringLit, Ident, Binary, Unary, Member, Index, Call,
    };
    K kind;
    int line = 0;

    std::string text;            // Number spelling / StringLit / Ident name
    bool bval = false;
    std::string op;              // Binary/Unary operator spelling
    ExprP a, b;                  // operands; Member/Index/Call base
    std::string member;          // Member
    std::vector<ExprP> args;     // Call
};

struct Stmt;
using StmtP = std::shared_ptr<const Stmt>;

struct Stmt {
    enum class K : uint8_t {
        Block, VarDecl, Assign, OpAssign, IncDec, If, While, For, Return, Throw,
        ExprStmt,
    };
    K kind;
    int line = 0;

    std::vector<StmtP> body;     // Block
    TypeRefP decl_ty;            // VarDecl
    std::string name;            // VarDecl
    ExprP init;                  // VarDecl initializer (may be null)
    ExprP target, value;         // Assign/OpAssign; IncDec target
    std::string op;              // OpAssign "+=" ... / IncDec "++" "--"
    ExprP cond;                  // If/While/For
    StmtP s1, s2, s3;            // If: then/else; For: init/step/body
    ExprP expr;                  // ExprStmt (a call)
};

struct ParamDecl {
    TypeRefP ty;
    std::string name;
    int line = 0;
};

struct StructDecl {
    std::string name;
    std::vector<ParamDecl> members;
    int line = 0;
};

struct StateVar {
    TypeRefP ty;
    std::string name;
    std::optional<ir::Visibility> vis;
    ExprP init;  // may be null
    int line = 0;
};

struct FunDecl {
    std::string name;
    std::vector<ParamDecl> params;
    TypeRefP ret;  // null when none
    ir::Visibility vis = ir::Visibility::Public;
    std::vector<StmtP> body;
    int line = 0;
};

struct ContractDecl {
    std::string name;
    std::vector<std::string> parents;
    std::vector<StateVar> state;
    std::vector<StructDecl> structs;
    std::vector<FunDecl> functions;
    // Declaration order across all three kinds, as (kind, index) pairs, so
    // translation can keep source ordering.
    enum class Item : uint8_t { State, Struct, Function };
    std::vector<std::pair<Item, size_t>> order;
    int line = 0;
};

struct SourceUnit {
    std::vector<ContractDecl> contracts;
};

struct ParseResult {
    std::optional<SourceUnit> unit;
    std::optional<FrontendError> error;
};

ParseResult parse(const std::vector<Token>& tokens);

}  // namespace fspvm::frontend::ast
