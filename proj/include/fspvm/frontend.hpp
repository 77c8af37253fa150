// Source-to-IR pipeline: a lexer and recursive-descent parser for the
// contract-language subset, a translator that elaborates the parse into fully
// annotated IR with a label-address table, and a canonical text form with a
// reader that round-trips it.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fspvm/germ.hpp"
#include "fspvm/ir.hpp"

namespace fspvm::frontend {

struct FrontendError {
    enum class Kind : uint8_t { Lex, Parse, Unsupported, Translate, Read };
    Kind kind = Kind::Parse;
    int line = 0;
    std::string message;

    std::string text() const;  // "line 12: unexpected token ';'"
};

// ---------------------------------------------------------------------------
// Lexing

enum class TokenKind : uint8_t { Identifier, Number, StringLit, Punct, End };

struct Token {
    TokenKind kind;
    std::string text;
    int line;
};

struct LexResult {
    std::vector<Token> tokens;
    std::optional<FrontendError> error;
};

LexResult lex(const std::string& src);

// ---------------------------------------------------------------------------
// Label addresses for declared names

// Insertion-ordered name-to-label assignment. Qualified keys keep the space
// injective: state variables bare, functions "f()", parameters and locals
// "f.x". Numbering starts past a reserved low band so program cells never
// shadow pointer constants baked into library cells.
class AddressTable {
  public:
    static constexpr uint32_t kFirstIndex = 0x0a;

    ir::LabelAddress intern(const std::string& key);
    std::optional<ir::LabelAddress> find(const std::string& key) const;
    const std::vector<std::pair<std::string, ir::LabelAddress>>& entries() const {
        return entries_;
    }
    size_t size() const { return entries_.size(); }

    // One "key index" line per entry, insertion order, hex index.
    std::string serialize() const;
    static std::optional<AddressTable> parse(const std::string& text);

    bool operator==(const AddressTable& o) const { return entries_ == o.entries_; }

  private:
    std::vector<std::pair<std::string, ir::LabelAddress>> entries_;
    std::map<std::string, uint32_t> by_key_;
    uint32_t next_ = kFirstIndex;
};

// ---------------------------------------------------------------------------
// Translation output

struct FunctionDef {
    std::string name;
    bool is_constructor = false;
    ir::Visibility vis = ir::Visibility::Public;
    std::vector<ir::ExprPtr> params;  // Par expressions, declaration order
    ir::Program body;
    ir::LType ret;  // undef when the function returns nothing
};

struct ProgramImage {
    std::string file;
    unsigned uint_bits = 256;
    ir::Program program;  // single Contract statement wrapping the body
    AddressTable table;
    ir::TypeContext ctx;
    std::map<std::string, FunctionDef> functions;
    std::string contract_name;
    std::vector<std::string> state_vars;  // declaration order
};

struct TranslateResult {
    std::optional<ProgramImage> image;
    std::optional<FrontendError> error;
};

// Full pipeline over contract source. `uint_bits` fixes the width of bare
// uint/int in the source and of the library cell layouts.
TranslateResult translate_source(const std::string& src, const std::string& file,
                                 unsigned uint_bits = 256);

// ---------------------------------------------------------------------------
// Canonical text

// Multi-line canonical form: one statement per line, children indented two
// spaces, expressions and types inline. read_program inverts it.
std::string pretty(const ir::Program& p);
std::string pretty(const ir::StmtPtr& s);
std::string pretty_expr(const ir::ExprPtr& e);

// Single-line rendering of one statement, children inline (reports, traces).
std::string line_text(const ir::StmtPtr& s);

struct ReadResult {
    std::optional<ir::Program> program;
    std::optional<FrontendError> error;
};

// Parses canonical text back to IR. Annotations are re-synthesized by the
// node factories; statement lines are set to the text line of each opening
// form, so pretty-printed equality holds up to line numbers.
ReadResult read_program(const std::string& text);

// Typing context reconstructed from declarations in an IR program (variable
// declarations, function statements, struct declarations) plus the library
// names for the given width. Lets checked commands accept bare IR files.
ir::TypeContext build_context(const ir::Program& p, unsigned uint_bits);

// Address table reconstructed from declarations in an IR program, following
// the translator's assignment order: per contract, state variables and struct
// names in declaration order, then the contract itself, then each function's
// slot followed by its parameters and body locals. Translating a source file
// and rebuilding the table from its IR agree.
AddressTable build_table(const ir::Program& p);

}  // namespace fspvm::frontend
