#pragma once
// Verification spec files: a line-oriented format with [section] headers,
// `key = value` lines and # comments that names a program, declares symbols,
// initializes memory and states the expected outcome. Parsing keeps every
// value textual; binding resolves the text against a translated program.

#include <optional>
#include <string>
#include <vector>

#include "fspvm/symexec.hpp"

namespace fspvm::specfile {

// One declared symbol. `binding_text` pins it to a concrete literal for
// concolic runs (`name: type = literal`).
struct SymbolLine {
    std::string name;
    std::string type_text;
    std::optional<std::string> binding_text;

    bool operator==(const SymbolLine&) const = default;
};

// One memory initialization: the value is a literal or a declared symbol.
struct PreLine {
    std::string target;
    std::string value_text;

    bool operator==(const PreLine&) const = default;
};

struct AssertLine {
    std::string target;
    std::string expr_text;

    bool operator==(const AssertLine&) const = default;
};

// A parsed spec file. serialize() emits the canonical form; parsing that
// form yields an equal value, so files round-trip.
struct SpecFileData {
    std::string name;
    std::string program;  // source path, relative to the spec file
    std::string entry;
    std::string mode = "static";  // static | concolic | selective
    unsigned uint_width = 64;     // width of untyped integer literals
    std::vector<SymbolLine> symbols;
    std::vector<PreLine> pre;
    std::string constraint_text;      // empty: unconstrained
    std::string result_text;          // "rollback" | "out_of_gas" | empty
    std::vector<AssertLine> asserts;  // the postcondition when result is empty
    fether::Fuel fuel{200, 64, 1000};

    std::string serialize() const;

    bool operator==(const SpecFileData& o) const {
        return name == o.name && program == o.program && entry == o.entry &&
               mode == o.mode && uint_width == o.uint_width && symbols == o.symbols &&
               pre == o.pre && constraint_text == o.constraint_text &&
               result_text == o.result_text && asserts == o.asserts &&
               fuel.k_stmt == o.fuel.k_stmt && fuel.k_val == o.fuel.k_val &&
               fuel.gas == o.fuel.gas;
    }
};

struct ParseOutcome {
    std::optional<SpecFileData> data;
    std::string error;  // "line N: message" on failure
};

ParseOutcome parse_spec(const std::string& text);
// Reads and parses; a missing or unreadable file is a parse error.
ParseOutcome load_spec(const std::string& path);

struct BindOutcome {
    std::optional<symexec::HoareSpec> spec;
    std::string mode;  // carried from the file
    std::string error;
};

// Resolves a parsed spec against a translated program: symbol types, literal
// values, target identifiers and formulas. `opts` supplies the identifier
// resolver and the reserved-cell layouts used to validate targets.
BindOutcome bind_spec(const SpecFileData& data, ir::Program program,
                      const symexec::VerifyOptions& opts);

}  // namespace fspvm::specfile
