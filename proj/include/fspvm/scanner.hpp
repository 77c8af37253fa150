#pragma once
// Syntactic vulnerability scanning over the IR. Each feature is a pure
// pattern over a statement in its structured control-flow context; findings
// are advisory (the matchers accept false alarms, never runtime failures).

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fspvm/ir.hpp"

namespace fspvm::scanner {

enum class Feature : uint8_t {
    UncheckedSend,
    IntegerOverflow,
    DivideByZero,
    StackOverflow,
};

inline constexpr std::array<Feature, 4> kAllFeatures = {
    Feature::UncheckedSend,
    Feature::IntegerOverflow,
    Feature::DivideByZero,
    Feature::StackOverflow,
};

const char* feature_name(Feature f);
std::optional<Feature> feature_by_name(const std::string& name);

struct Finding {
    Feature feature = Feature::UncheckedSend;
    ir::StmtPtr stmt;
    int line = 0;
    std::string note;
};

// First offending statement in program order, or null when the feature
// finds nothing.
ir::StmtPtr scan(const ir::Program& prog, Feature f);

// All findings for every feature: features in declaration order, findings in
// program order within each feature.
struct ScanReport {
    std::vector<Finding> findings;

    bool empty() const { return findings.empty(); }
};

ScanReport scan_all(const ir::Program& prog);
std::vector<Finding> scan_feature(const ir::Program& prog, Feature f);

}  // namespace fspvm::scanner
