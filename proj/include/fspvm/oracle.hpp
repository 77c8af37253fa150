// Reference evaluator and differential gate. A second interpreter, written as
// plain recursive descent with no control stack and no sharing of evaluation
// code with the step machine, replays the same programs under the same fuel
// discipline. Randomized well-typed programs are run through both; any
// disagreement in outcome, memory image or fuel consumption is shrunk to a
// minimal reproducing program.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fspvm/fether.hpp"
#include "fspvm/germ.hpp"
#include "fspvm/ir.hpp"

namespace fspvm::oracle {

// Outcome of the reference evaluator. Same observables as the interpreter's
// ExecOutcome; only the reference evaluator constructs one.
struct RefOutcome {
    using Kind = fether::ExecOutcome::Kind;

    Kind kind = Kind::Normal;
    germ::Memory memory;  // Thrown carries the entry snapshot, like the machine
    fether::Environment env;
    std::optional<fether::FaultInfo> fault;
    std::optional<fether::StopReason> stop;
    uint64_t gas_used = 0;
    uint64_t steps = 0;

    std::string text() const;
};

// Runs a whole program with fresh budgets.
RefOutcome ref_exec(const ir::Program& prog, germ::Memory m0,
                    const fether::ExecConfig& cfg);

// Deploys `prog`, then invokes one registered function with fresh budgets on
// the post-deploy memory, mirroring a run/call pair on one machine. A deploy
// that does not finish normally is returned as the outcome.
RefOutcome ref_call(const ir::Program& prog, const std::string& function,
                    const std::vector<germ::Value>& args, germ::Memory m0,
                    const fether::ExecConfig& cfg);

// First observable on which two outcomes disagree.
struct Divergence {
    std::string observable;  // "outcome", "memory", "gas", "steps", ...
    std::string left;        // interpreter's rendering
    std::string right;       // reference evaluator's rendering
};

// Relates an interpreter outcome to a reference outcome: same variant; equal
// memories for Normal and Thrown; same stop reason for fuel exhaustion, whose
// partial memories are not compared; same fault kind; same gas and steps.
std::optional<Divergence> relate(const fether::ExecOutcome& left,
                                 const RefOutcome& right);

// Runs both evaluators on the same inputs and relates the outcomes.
std::optional<Divergence> check_equiv(const ir::Program& prog,
                                      const germ::Memory& m0,
                                      const fether::ExecConfig& cfg);
std::optional<Divergence> check_equiv_call(const ir::Program& prog,
                                           const std::string& function,
                                           const std::vector<germ::Value>& args,
                                           const germ::Memory& m0,
                                           const fether::ExecConfig& cfg);

// ---------------------------------------------------------------------------
// Random program generation

struct GenOptions {
    int max_stmts = 30;  // bound on generated statements, Seq wrappers excluded
};

// Deterministic well-typed program for a seed: scalar, array and mapping
// declarations first, then statements over them. Every identifier used is
// declared, every operator sees matching operand types, so the interpreter
// exercises semantics rather than rejection paths. Runtime faults (division
// by zero, index range, fuel) are still reachable on purpose.
ir::Program gen_program(uint64_t seed, const GenOptions& opts);

// Statement count as bounded by GenOptions: every node except Seq.
size_t count_stmts(const ir::Program& p);

// Per-case seed derivation (splitmix-style mix of campaign seed and index).
uint64_t case_seed(uint64_t campaign_seed, uint64_t index);

// Program with every If statement's branches exchanged, recursively. Feeding
// the rewritten program to one evaluator only simulates a branch-selection
// bug, which the differential gate must catch.
ir::Program with_swapped_if_branches(const ir::Program& p);

// ---------------------------------------------------------------------------
// Campaign

struct CampaignOptions {
    uint64_t count = 10000;
    int max_stmts = 30;
    uint64_t seed = 42;
    int workers = 1;
    // Budgets are deliberately tight so generated loops exercise the fuel
    // paths on both sides.
    fether::Fuel fuel{300, 64, 256};
    unsigned uint_bits = 64;
    size_t memory_size = 256;
    // Mutation under test: the interpreter executes the swapped-branch
    // rewrite while the reference evaluator sees the original.
    bool swap_if_branches = false;
};

struct Repro {
    uint64_t case_index = 0;
    uint64_t seed = 0;        // per-case seed, reproduces via gen_program
    std::string program;      // canonical text of the minimized program
    size_t stmt_count = 0;
    Divergence divergence;
};

struct CampaignResult {
    uint64_t cases = 0;       // cases examined before stopping
    uint64_t divergences = 0;
    std::optional<Repro> first;  // lowest-index divergence, minimized
};

// Runs generated cases through both evaluators. Stops at the first divergent
// case (lowest index across workers) and reports it shrunk to a minimal
// program that still diverges.
CampaignResult run_campaign(const CampaignOptions& opts);

// Replays one program under the per-case configuration a campaign would use
// for `seed` (send script included). Repros re-validate through this.
std::optional<Divergence> check_case(const ir::Program& prog, uint64_t seed,
                                     const CampaignOptions& opts);

}  // namespace fspvm::oracle
