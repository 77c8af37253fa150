// Concrete folding shared by the symbolic machine and the solver: operator
// semantics here must match the interpreter exactly (wrap-around with an
// overflow flag, same-type comparison rules, division faults).
#pragma once

#include <map>
#include <optional>
#include <string>

#include "fspvm/germ.hpp"
#include "fspvm/symexec.hpp"

namespace fspvm::symexec::detail {

struct FoldResult {
    std::optional<germ::Value> v;
    bool overflow = false;
    std::string error;  // set when v is empty: "divide by zero", type mismatch
};

FoldResult fold_binop(SymOp op, const germ::Value& a, const germ::Value& b);
FoldResult fold_not(const germ::Value& a);
FoldResult fold_neg(const germ::Value& a);
FoldResult fold_cast(const ir::LType& target, const germ::Value& a);

// Evaluates a scalar term under a model. Symbols absent from the model read
// as zero or false. Empty on division by zero or operand type mismatch.
std::optional<germ::Value> eval_term(const SymValue& t,
                                     const std::map<std::string, germ::Value>& model);

// Partial evaluation: replaces mapped symbols with their values, folds
// applications whose operands become concrete, and short-circuits && and ||
// against concrete operands. Terms that would fault concretely (division by
// zero, operand mismatch) are left as applications. Compounds substitute
// member-wise.
SymValue subst(const SymValue& t, const std::map<std::string, germ::Value>& model);

// Zero or false of the symbol's type; completes partial models
// deterministically.
germ::Value default_of(const ir::LType& ty);

}  // namespace fspvm::symexec::detail
