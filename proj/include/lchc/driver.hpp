#ifndef LCHC_DRIVER_HPP
#define LCHC_DRIVER_HPP

#include "lchc/entwined.hpp"
#include "lchc/resolution.hpp"
#include "lchc/typesys.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace lchc {

enum class SolveMode { Auto, FirstOrder, Initial };

struct SolveConfig {
    uint64_t resolution_slice = 1000; // rule applications per round
    uint64_t model_slice = 50;        // candidates per round
    std::optional<uint64_t> total_budget; // applications plus candidates
    std::optional<std::string> hint;      // path of a model witness
    std::optional<nlohmann::json> hint_json;
    SolveMode mode = SolveMode::Auto;
    unsigned workers = 1;
    bool kleene = true; // try the fixpoint candidate before enumerating
};

struct SolveStats {
    uint64_t applications = 0;
    uint64_t candidates = 0;
    int kleene_iterations = 0;
    bool refutation_exhausted = false;
    bool enumeration_exhausted = false;
    double seconds = 0;
};

struct Verdict {
    enum class K { Sat, Unsat, Unknown, Invalid };
    K k = K::Unknown;
    std::optional<Structure> model;
    std::optional<ProofTrace> trace;
    ValidationReport report;
    SolveStats stats;
    std::string source; // "hint", "fixpoint", "enumeration" or "resolution"
    std::string note;

    nlohmann::json to_json() const;
};

const char *verdict_name(Verdict::K k);
int exit_code(Verdict::K k);

Verdict solve(std::shared_ptr<const Problem> p, const SolveConfig &cfg = {});

struct VerifyResult {
    bool ok = false;
    std::string diagnostic;
};

/// Deserializes a witness and checks it against every clause.
VerifyResult verify(std::shared_ptr<const Problem> p, const std::string &witness_text);

/// The command-line interface; returns the exit code.
int cli(int argc, const char *const *argv);

} // namespace lchc

#endif
