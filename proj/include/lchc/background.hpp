#ifndef LCHC_BACKGROUND_HPP
#define LCHC_BACKGROUND_HPP

#include "lchc/presburger.hpp"
#include "lchc/syntax.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace lchc {

using pres::LinTerm;
using pres::VarId;

using WElem = std::vector<Int>;

/// Marker for an unbounded (omega) component of a downward generator.
inline const Int &omega() {
    static const Int w(-1);
    return w;
}

/// A set of W elements closed in the working direction: upward closed for
/// upward problems, downward closed for downward ones.
///   LIA:  Empty | All | Bound(k), meaning w >= k (upward) or w <= k (downward).
///   Nat:  Empty | All | Antichain. Upward antichains list minimal elements;
///         downward ones list maximal generators whose components may be omega.
struct Upset {
    enum class K { Empty, All, Bound, Antichain };
    K k = K::Empty;
    Int bound;
    std::vector<WElem> elems;

    bool operator==(const Upset &o) const { return k == o.k && bound == o.bound && elems == o.elems; }
    bool operator!=(const Upset &o) const { return !(*this == o); }
    bool operator<(const Upset &o) const;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class TheoryHandle {
public:
    TheoryHandle(Theory t, int dim, Direction dir);
    explicit TheoryHandle(const Problem &p) : TheoryHandle(p.theory, p.dim, p.dir) {}

    Theory theory() const { return theory_; }
    int dim() const { return dim_; }
    Direction dir() const { return dir_; }
    bool nat() const { return theory_ == Theory::Nat; }
    bool down() const { return dir_ == Direction::Downward; }

    /// The order of W itself (LIA order or componentwise), independent of direction.
    bool w_leq(const WElem &a, const WElem &b) const;

    Upset empty() const { return {}; }
    Upset all() const;
    Upset canonicalize(Upset u) const;
    /// Descriptor generated by a single element in the working direction.
    Upset principal(const WElem &w) const;
    bool member(const WElem &w, const Upset &u) const;
    /// Membership formula for a symbolic element given by its components.
    pres::Form to_formula(const Upset &u, const std::vector<LinTerm> &w) const;
    Upset join(const Upset &a, const Upset &b) const;
    bool subset(const Upset &a, const Upset &b) const;

    /// Injective fair enumeration of canonical descriptors.
    Upset enumerate(size_t i) const;
    /// Size measure used by enumerate: index of the level where u first appears.
    size_t level(const Upset &u) const;

    /// Closure in the working direction of the set of w satisfying phi. Free
    /// variables of phi other than comps are read existentially.
    Upset closure_of(const pres::Form &phi, const std::vector<VarId> &comps) const;

    nlohmann::json to_json(const Upset &u) const;
    Upset from_json(const nlohmann::json &j) const;
    std::string str(const Upset &u) const;

    /// Components of a W element as d constants.
    std::vector<LinTerm> constant(const WElem &w) const;
    /// x >= 0 on every component for Nat theories, true otherwise.
    pres::Form domain(const std::vector<LinTerm> &w) const;

private:
    Theory theory_;
    int dim_;
    Direction dir_;
    bool dominated(const WElem &a, const WElem &b) const; // a's ideal/filter inside b's
};

/// W-sorted variables mapped to component terms.
using WEnv = std::map<std::string, std::vector<LinTerm>>;

struct IllSortedAtom : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Components of a numeric term: d entries for W-sorted terms, one for Num.
std::vector<LinTerm> compile_term(const TermP &t, const WEnv &env, const TheoryHandle &th);
/// A background atom over numeric terms, compiled componentwise.
pres::Form compile_atom(const Atom &a, const WEnv &env, const TheoryHandle &th);

/// Fresh Presburger component variables for a W variable.
std::vector<LinTerm> fresh_components(const std::string &hint, int dim, std::vector<VarId> *ids = nullptr);

/// Existential satisfiability of a conjunction of background atoms (eqs and
/// numeric) over the given variables; finite-sort variables are grounded.
bool exists_sat(const std::vector<Atom> &atoms, const std::vector<VarDecl> &vars, const Problem &p);

} // namespace lchc

#endif
