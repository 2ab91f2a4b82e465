#ifndef LCHC_ENTWINED_HPP
#define LCHC_ENTWINED_HPP

#include "lchc/background.hpp"
#include "lchc/syntax.hpp"
#include "lchc/typesys.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lchc {

struct FrameTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StageOrderViolation : std::logic_error {
    using std::logic_error::logic_error;
};
struct MissingValuation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FrameInconsistency : SchemaError {
    using SchemaError::SchemaError;
};

/// Largest frame that is ever enumerated element by element.
constexpr uint64_t kFrameCap = uint64_t(1) << 20;

/// The finite interpretation of a relational (or base) sort. Elements are
/// numbered 0..size-1.
///   Bool, Fin      base sorts
///   Inactive       full function space; element = bitmask over argument keys
///   CaseII         W-headed active sort: top plus the distinct partial
///                  applications X s̄ of interpreted predicates; element 0 is top
///   Fun            active sort with arguments before W: [pre keys -> target],
///                  element = base-|target| digits over the pre keys
/// Keys over argument frames are mixed radix with the first argument most
/// significant, so fixing a prefix of the arguments selects a contiguous block.
struct Frame {
    enum class K { Bool, Fin, Inactive, CaseII, Fun };
    K k = K::Bool;
    SortP sort;
    bool huge = false; // element indices would not fit in 64 bits
    uint64_t size = 0;
    std::vector<const Frame *> args; // Inactive: all args; Fun: pre args; CaseII: post args
    uint64_t keys = 1;               // product of the argument frame sizes
    const Frame *target = nullptr;   // Fun
    // CaseII
    std::vector<std::vector<Upset>> rows; // per element, one descriptor per post key
    std::map<std::pair<std::string, uint64_t>, uint64_t> alias;
    std::vector<std::pair<std::string, uint64_t>> first_alias; // ("", 0) for top

    /// Element obtained by fixing the leading argument to a (Inactive and Fun).
    uint64_t slice(uint64_t e, uint64_t a, uint64_t rest_keys) const;
    /// Digit of a Fun element at a pre key, or bit of an Inactive element.
    uint64_t digit(uint64_t e, uint64_t key) const;
};

struct PredInfo {
    std::string name;
    SortP sort;
    int order = 0;
    bool active = false;
    size_t wpos = 0;                 // valid when active
    std::vector<SortP> args;         // all argument sorts
    std::vector<SortP> key_sorts;    // non-W argument sorts, in order
    size_t npre = 0;                 // key sorts before W
};

/// A predicate given by a term over its parameters rather than a table.
struct Lambda {
    std::vector<VarDecl> params;
    std::vector<VarDecl> tops; // free relational variables, bound to top
    TermP body; // sort o
};

struct Table {
    std::map<uint64_t, Upset> rows; // active; absent rows are empty
    std::set<uint64_t> trues;       // inactive
    std::shared_ptr<const Lambda> lambda;
    bool operator==(const Table &o) const { return rows == o.rows && trues == o.trues && lambda == o.lambda; }
};

/// An entwined structure: one table per predicate. Frames are derived from
/// the tables on demand, so every sort has exactly one frame, namely the one
/// at the stage where it settles.
class Structure {
public:
    explicit Structure(std::shared_ptr<const Problem> p);
    Structure(const Structure &o);
    Structure &operator=(const Structure &o);

    const Problem &problem() const { return *p_; }
    std::shared_ptr<const Problem> problem_ptr() const { return p_; }
    const TheoryHandle &theory() const { return th_; }
    int max_order() const { return max_order_; }
    int stages() const { return max_order_ + 1; }
    const std::vector<PredInfo> &preds() const { return preds_; }
    const PredInfo &pred(const std::string &name) const;
    bool has_pred(const std::string &name) const { return index_.count(name) > 0; }

    const Table &table(const std::string &pred) const;
    Upset row(const std::string &pred, uint64_t key) const;
    bool truth(const std::string &pred, uint64_t key) const;
    void set_row(const std::string &pred, uint64_t key, const Upset &u);
    void set_truth(const std::string &pred, uint64_t key, bool v);
    void set_lambda(const std::string &pred, std::shared_ptr<const Lambda> l);
    void clear_table(const std::string &pred);

    const Frame &frame(const SortP &s) const;
    /// Number of table keys of a predicate; throws FrameTooLarge.
    uint64_t key_space(const std::string &pred) const;
    std::vector<uint64_t> decode_key(const std::string &pred, uint64_t key) const;
    uint64_t encode_key(const std::string &pred, const std::vector<uint64_t> &elems) const;
    /// Element of the frame of the remaining sort obtained by applying a
    /// predicate to the given leading non-W arguments (no W among them).
    uint64_t partial_elem(const std::string &pred, const std::vector<uint64_t> &elems) const;

    nlohmann::json canon(const Frame &f, uint64_t e) const;
    uint64_t from_canon(const Frame &f, const nlohmann::json &j) const;
    std::string elem_str(const Frame &f, uint64_t e) const;

    /// Equal tables (frames then coincide).
    bool same_tables(const Structure &o) const;

private:
    std::shared_ptr<const Problem> p_;
    TheoryHandle th_;
    int max_order_ = 0;
    std::vector<PredInfo> preds_;
    std::map<std::string, size_t> index_;
    std::vector<Table> tables_;
    mutable std::map<std::string, std::unique_ptr<Frame>> frames_;

    void invalidate() { frames_.clear(); }
    std::unique_ptr<Frame> build(const SortP &s) const;
    std::vector<const Frame *> key_frames(const PredInfo &pi) const;
};

// ---------------------------------------------------------------- evaluation

/// A value during symbolic evaluation.
struct Val {
    enum class K { Prop, Elem, W, Partial };
    K k = K::Prop;
    pres::Form prop;            // Prop
    SortP sort;                 // Elem, Partial: sort of the value itself
    uint64_t idx = 0;           // Elem
    std::vector<LinTerm> w;     // W
    enum class H { Pred, Top, Elem } head = H::Pred; // Partial
    std::string pred;           // Partial, H::Pred
    SortP head_sort;            // Partial
    uint64_t head_idx = 0;      // Partial, H::Elem
    std::vector<Val> args;      // Partial
};

struct Branch {
    pres::Form guard;
    Val v;
};

/// Values of clause variables: finite ones as frame elements, W ones as
/// component terms.
struct Valuation {
    std::map<std::string, Val> vals;
    WEnv wenv;                      // W and component variables
    std::vector<pres::Form> domain; // nonnegativity of W components
};

/// Symbolic value of a term under a valuation, split into guarded cases.
std::vector<Branch> eval_branches(const Structure &m, const TermP &t, const Valuation &v);
/// Formula over W components equivalent to a foreground atom.
pres::Form eval_atom(const Structure &m, const TermP &atom, const Valuation &v);
/// Truth of a closed atom (all W arguments concrete).
bool eval_closed(const Structure &m, const TermP &atom);
Val elem_val(const SortP &s, uint64_t idx);
Val w_val(const std::vector<LinTerm> &w);

struct CheckOptions {
    bool skip_limit = true;
    uint64_t max_valuations = uint64_t(1) << 22;
};

/// Calls f for each valuation of the non-W variables over their frames, with
/// W variables bound to fresh components. Stops when f returns false.
void for_each_valuation(const Structure &m, const std::vector<VarDecl> &vars, const CheckOptions &opt,
                        const std::function<bool(const Valuation &)> &f);
/// Body of a clause as a formula under a valuation.
pres::Form body_formula(const Structure &m, const Clause &c, const Valuation &v);

bool check_clause(const Structure &m, const Clause &c, const CheckOptions &opt = {});
bool check_model(const Structure &m, const Problem &p, const CheckOptions &opt = {});
bool models_definite(const Structure &m, const Problem &p, const CheckOptions &opt = {});
/// Some valuation satisfies the (goal) body in m.
bool body_satisfiable(const Structure &m, const Clause &goal, const CheckOptions &opt = {});

// ---------------------------------------------------------------- search

/// Frame element of sort s in dst with the same construction as e in src.
uint64_t translate_elem(const Structure &src, const Structure &dst, const SortP &s, uint64_t e);

struct KleeneInfo {
    int iterations = 0;
    bool converged = false;
    bool widened = false;
    bool models_definite = false;
    bool models_all = false;
};

struct KleeneOptions {
    int max_iterations = 300;
    int widen_after = 24;
    CheckOptions check;
};

/// Least-fixpoint style candidate: iterate the immediate consequence map from
/// the empty structure, widening rows that keep growing.
std::optional<Structure> kleene_candidate(std::shared_ptr<const Problem> p, KleeneInfo *info = nullptr,
                                          const KleeneOptions &opt = {});

/// Fair enumeration of entwined structures by shells: shell s contains the
/// structures whose largest row choice index is s.
class StructureEnumerator {
public:
    explicit StructureEnumerator(std::shared_ptr<const Problem> p);
    std::optional<Structure> next();
    uint64_t produced() const { return produced_; }

private:
    std::shared_ptr<const Problem> p_;
    uint64_t shell_ = 0, pos_ = 0, produced_ = 0;
    std::vector<Structure> buffer_;
    size_t buf_at_ = 0;
    bool exhausted_ = false;
    void fill();
};

/// Least model of a first-order problem restricted to a box of W values,
/// closed under the limit clauses; a test oracle for window-safe problems.
struct WindowModel {
    int window = 0;
    std::map<std::string, std::set<std::pair<std::vector<uint64_t>, WElem>>> facts;
    bool goal_violated = false; // some goal body holds
};
WindowModel bounded_canonical_model(const Problem &p, int window);

// ---------------------------------------------------------------- io

nlohmann::json serialize_model(const Structure &m);
Structure deserialize_model(std::shared_ptr<const Problem> p, const nlohmann::json &j);

/// Shared normalized problem from surface text.
std::shared_ptr<const Problem> prepare(const std::string &text);

} // namespace lchc

#endif
