#ifndef LCHC_SYNTAX_HPP
#define LCHC_SYNTAX_HPP

#include "lchc/presburger.hpp"
#include "lchc/sexpr.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lchc {

using pres::Int;

// ---------------------------------------------------------------- sorts

struct Sort;
using SortP = std::shared_ptr<const Sort>;

struct Sort {
    // Num is the sort of a single integer component of a tuple; it never
    // occurs in declarations and coincides with W when the dimension is 1.
    enum class K { Prop, Fin, W, Num, Arrow };
    K k = K::Prop;
    SortP arg, res;
};

SortP s_prop();
SortP s_fin();
SortP s_w();
SortP s_num();
SortP s_arrow(SortP a, SortP b);
SortP s_arrows(const std::vector<SortP> &args, SortP res);

bool sort_eq(const SortP &a, const SortP &b);
std::vector<SortP> sort_args(const SortP &s);
/// Result of a full application (the sort after all arrows).
SortP sort_target(const SortP &s);
bool is_relational(const SortP &s);
/// Printed in surface syntax, e.g. "(-> S W o)".
std::string sort_str(const SortP &s, const std::string &fin_name = "S");

// ---------------------------------------------------------------- terms

struct Term;
using TermP = std::shared_ptr<const Term>;

struct Term {
    enum class K { Var, Pred, SConst, Bool, WLit, Add, Sub, Neg, Scale, Comp, App };
    K k = K::Var;
    std::string name;       // Var, Pred, SConst
    bool bval = false;      // Bool
    std::vector<Int> tuple; // WLit
    bool is_tuple = false;  // WLit printed as (tuple ...)
    Int factor;             // Scale
    int comp = 0;           // Comp (1-based)
    TermP a, b;             // Add/Sub: a,b; Neg/Scale/Comp: a; App: a applied to b
    Loc loc;
};

TermP t_var(const std::string &n, Loc l = {});
TermP t_pred(const std::string &n, Loc l = {});
TermP t_sconst(const std::string &n, Loc l = {});
TermP t_bool(bool b, Loc l = {});
TermP t_wlit(std::vector<Int> v, bool tuple, Loc l = {});
TermP t_app(TermP f, TermP x, Loc l = {});
TermP t_apps(TermP f, const std::vector<TermP> &xs);
TermP t_binop(Term::K k, TermP a, TermP b, Loc l = {});
TermP t_neg(TermP a, Loc l = {});
TermP t_scale(Int k, TermP a, Loc l = {});
TermP t_comp(TermP a, int i, Loc l = {});

/// Splits an application spine into head and arguments.
TermP spine(const TermP &t, std::vector<TermP> &args);
bool term_eq(const TermP &a, const TermP &b);
std::string term_str(const TermP &t);
/// Replaces free variables (terms have no binders).
TermP subst_term(const TermP &t, const std::map<std::string, TermP> &s);
void term_vars(const TermP &t, std::vector<std::string> &out);

// ---------------------------------------------------------------- formulas

using pres::Rel;

struct Atom {
    enum class K { Bg, Eqs, Fg };
    K k = K::Fg;
    Rel rel = Rel::Le; // Bg
    TermP lhs, rhs;    // Bg, Eqs
    TermP fg;          // Fg: a term of sort o
    Loc loc;
};

bool atom_eq(const Atom &a, const Atom &b);
std::string atom_str(const Atom &a);
Atom subst_atom(const Atom &a, const std::map<std::string, TermP> &s);

struct VarDecl {
    std::string name;
    SortP sort;
};

struct Body;
using BodyP = std::shared_ptr<const Body>;

struct Body {
    enum class K { True, False, AtomK, And, Or, Exists };
    K k = K::True;
    Atom atom;
    std::vector<BodyP> kids;
    std::vector<VarDecl> binders; // Exists
    Loc loc;
};

BodyP b_true();
BodyP b_atom(Atom a);
BodyP b_and(std::vector<BodyP> ks);
BodyP b_or(std::vector<BodyP> ks);
BodyP b_exists(std::vector<VarDecl> vs, BodyP body);

struct Clause {
    std::vector<VarDecl> vars;
    bool goal = false;
    std::string head;            // definite clauses only
    std::vector<TermP> head_args;
    BodyP body = b_true();
    Loc loc;

    const VarDecl *var(const std::string &n) const;
};

/// Conjunctive body as a flat atom list; throws if the body has Or or Exists.
std::vector<Atom> body_atoms(const Clause &c);

enum class Theory { LIA, Nat };
enum class Direction { Upward, Downward };

struct Problem {
    Theory theory = Theory::LIA;
    int dim = 1;
    Direction dir = Direction::Upward;
    std::string fin_name = "S";
    std::vector<std::string> fin_elems;
    std::vector<std::pair<std::string, SortP>> decls;
    std::vector<Clause> clauses;
    std::vector<Clause> goals;
    bool require_explicit_limits = false;

    SortP decl(const std::string &pred) const;
    int fin_index(const std::string &c) const;
};

struct UnknownSymbol : ParseError {
    using ParseError::ParseError;
};
struct ArityMismatch : ParseError {
    using ParseError::ParseError;
};

Problem parse_problem(const std::string &text);
std::string print_problem(const Problem &p);
std::string clause_str(const Clause &c, const std::string &fin_name = "S");
bool problem_eq(const Problem &a, const Problem &b);

/// Disjunction splitting, hoisting of arithmetic out of foreground arguments,
/// head argument linearization and limit-clause insertion.
Problem normalize_problem(const Problem &p);

/// Index of the W argument of a predicate sort, if any.
std::optional<size_t> w_position(const SortP &s);
/// True when c is the limit clause of its head predicate for direction d.
bool is_limit_clause(const Problem &p, const Clause &c);
Clause make_limit_clause(const Problem &p, const std::string &pred);

} // namespace lchc

#endif
