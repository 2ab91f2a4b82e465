#ifndef LCHC_RESOLUTION_HPP
#define LCHC_RESOLUTION_HPP

#include "lchc/entwined.hpp"
#include "lchc/syntax.hpp"

#include <json.hpp>

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lchc {

struct HeadMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A derived goal clause. Variables are named canonically by first
/// occurrence, so equal goals modulo renaming print identically.
struct GoalState {
    std::vector<VarDecl> vars;
    std::vector<Atom> atoms;
    std::vector<bool> from_limit; // atom was introduced by a limit clause
    int depth = 0;
    int cost = 0; // search cost: limit steps weigh more than other steps
    int root = -1; // goal index, for root states
    int parent = -1, atom = -1, definite = -1;
};

GoalState root_goal(const Problem &p, size_t goal_idx);
/// Resolves atom atom_idx of g against definite clause def_idx of p.
GoalState resolve(const Problem &p, const GoalState &g, size_t atom_idx, size_t def_idx);
/// The background conjunction when every foreground atom is variable headed
/// and the background part is satisfiable.
std::optional<std::string> try_refute(const Problem &p, const GoalState &g);
std::string goal_str(const Problem &p, const GoalState &g);
/// Background part satisfiable and no false atom.
bool goal_viable(const Problem &p, const GoalState &g);

struct ProofStep {
    std::string goal;
    std::string rule; // "goal", "resolution" or "refutation"
    int parent = -1, atom = -1, definite = -1;
};

struct ProofTrace {
    std::vector<ProofStep> steps;
    std::string constraints;

    nlohmann::json to_json() const;
    static ProofTrace from_json(const nlohmann::json &j);
};

bool replay(const Problem &p, const ProofTrace &t);

struct RefuterOptions {
    bool breadth_first = false;
    /// A structure known to satisfy every definite clause; goals it
    /// satisfies are dropped.
    std::optional<Structure> prune;
    int initial_depth = 16;
    int limit_cost = 16;
};

/// Resumable refutation search. Breadth-first mode expands every atom of
/// every goal by depth with duplicate elimination; guided mode selects the
/// leftmost predicate-headed atom and deepens iteratively.
class Refuter {
public:
    Refuter(std::shared_ptr<const Problem> p, RefuterOptions opt = {});
    /// Runs up to n more rule applications; breadth-first mode finishes the
    /// goal it is expanding.
    std::optional<ProofTrace> run(uint64_t n);
    uint64_t applications() const { return applications_; }
    uint64_t explored() const { return explored_; }
    /// The search space is finite and contains no refutation.
    bool exhausted() const { return exhausted_; }

private:
    struct Node {
        GoalState g;
        size_t next_def = 0;
        int id = -1; // index into states_
    };
    std::shared_ptr<const Problem> p_;
    RefuterOptions opt_;
    std::vector<GoalState> states_; // every accepted state, for traces
    std::deque<int> queue_;         // breadth-first frontier
    std::set<std::string> seen_;
    std::vector<Node> stack_; // guided
    int bound_ = 0;
    bool cut_ = false;
    bool exhausted_ = false;
    std::optional<ProofTrace> found_;
    uint64_t applications_ = 0, explored_ = 0;

    int selected(const GoalState &g) const;
    bool accept(const GoalState &g);
    std::optional<ProofTrace> finish(int id, const std::string &constraints);
    void restart();
    std::optional<ProofTrace> run_bfs(uint64_t n);
    std::optional<ProofTrace> run_guided(uint64_t n);
};

/// Breadth-first saturation with a budget of rule applications.
struct SaturationResult {
    bool refuted = false;
    ProofTrace trace;
    uint64_t explored = 0;
};
SaturationResult saturate(std::shared_ptr<const Problem> p, uint64_t budget);

} // namespace lchc

#endif
