#ifndef LCHC_PRESBURGER_INTERNAL_HPP
#define LCHC_PRESBURGER_INTERNAL_HPP

#include "lchc/presburger.hpp"

namespace lchc::pres::detail {

// Normalized literal: t <= 0, t = 0, m | t, or not (m | t).
struct Lit {
    enum K : unsigned char { Le, Eq, Dv, Nd } k = Le;
    Int m;
    LinTerm t;
    bool operator==(const Lit &o) const { return k == o.k && t == o.t && (k < Dv || m == o.m); }
};

enum class Tri { False, True, Open };

Tri normalize(Lit &l);
/// Literal negation as a disjunction of normalized literals (or a constant).
std::vector<Lit> negate_lit(const Lit &l, Tri &constant);
bool eval_lit(const Lit &l, const Assignment &a);

struct Node;
using NodeP = std::shared_ptr<const Node>;
struct Node {
    enum K : unsigned char { T, F, L, And, Or } k = T;
    Lit lit;
    std::vector<NodeP> kids;
};

NodeP n_true();
NodeP n_false();
NodeP n_lit(Lit l);
NodeP n_and(std::vector<NodeP> kids);
NodeP n_or(std::vector<NodeP> kids);
NodeP n_negate(const NodeP &n);
bool mentions(const NodeP &n, VarId x);

/// Quantifier elimination into negation normal form.
NodeP qe(const Form &f, bool neg);
NodeP exists_elim(VarId x, const NodeP &phi);
Form to_form(const NodeP &n);
bool eval_node(const NodeP &n, const Assignment &a);

/// One elimination step of x from a conjunction of literals: an equivalent
/// disjunction of x-free conjunctions.
std::vector<std::vector<Lit>> project_conj(const std::vector<Lit> &lits, VarId x);
bool conj_sat(std::vector<Lit> lits);
bool node_sat(const NodeP &n);

Int lcm(const Int &a, const Int &b);

} // namespace lchc::pres::detail

#endif
