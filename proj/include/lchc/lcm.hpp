#ifndef LCHC_LCM_HPP
#define LCHC_LCM_HPP

#include "lchc/syntax.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace lchc {

struct IllFormedMachine : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A lossy counter machine with increments (shape A) and zero test or
/// decrement branches (shape B). Counters are numbered from 1.
struct LCM {
    struct Instr {
        enum class K { A, B } k = K::A;
        std::string from;
        int counter = 1;
        std::string to;      // A
        std::string if_zero; // B
        std::string dec;     // B, taken when the counter is positive
    };
    std::vector<std::string> states;
    std::string initial, final_state;
    int counters = 1;
    std::vector<Instr> instrs;

    static LCM from_json(const nlohmann::json &j);
    nlohmann::json to_json() const;
    void check() const;
};

struct LCMConfig {
    std::string state;
    std::vector<uint64_t> values;
    /// Parses "q,3,0".
    static LCMConfig parse(const std::string &s);
};

/// Limit Datalog over NatTuples(n), downward closed. UNSAT exactly when the
/// target is reachable; with cover the goal asks for some configuration at
/// or above the target instead.
Problem encode_lcm(const LCM &m, const LCMConfig &target, bool cover = false);

/// Breadth-first search over configurations with all counters at most cap.
bool simulate_reachable(const LCM &m, const LCMConfig &target, uint64_t cap);

/// Predicate name of a state.
std::string lcm_pred(const std::string &state);

} // namespace lchc

#endif
