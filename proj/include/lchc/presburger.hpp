#ifndef LCHC_PRESBURGER_HPP
#define LCHC_PRESBURGER_HPP

#include <gmpxx.h>

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lchc::pres {

using Int = mpz_class;
using VarId = int;

/// Interned integer variable names shared by every formula in the process.
VarId var_id(const std::string &name);
const std::string &var_name(VarId v);
/// A variable id that has never been handed out before.
VarId fresh_var(const std::string &hint);

using Assignment = std::map<VarId, Int>;

class LinTerm {
public:
    LinTerm() = default;
    explicit LinTerm(Int c) : c_(std::move(c)) {}
    LinTerm(long c) : c_(c) {}
    static LinTerm var(VarId v, const Int &coeff = 1);

    const Int &constant() const { return c_; }
    const std::vector<std::pair<VarId, Int>> &coeffs() const { return cs_; }
    Int coeff(VarId v) const;
    bool has(VarId v) const;
    bool is_constant() const { return cs_.empty(); }

    LinTerm operator+(const LinTerm &o) const;
    LinTerm operator-(const LinTerm &o) const;
    LinTerm operator-() const;
    LinTerm operator*(const Int &k) const;
    LinTerm &operator+=(const LinTerm &o) { return *this = *this + o; }

    LinTerm substitute(VarId v, const LinTerm &t) const;
    LinTerm without(VarId v) const;
    Int eval(const Assignment &a) const;
    /// gcd of the variable coefficients (0 when constant).
    Int content() const;

    bool operator==(const LinTerm &o) const { return c_ == o.c_ && cs_ == o.cs_; }
    bool operator!=(const LinTerm &o) const { return !(*this == o); }
    bool operator<(const LinTerm &o) const;

    std::string str() const;

private:
    Int c_ = 0;
    std::vector<std::pair<VarId, Int>> cs_;
};

enum class Rel { Le, Lt, Eq, Ne, Ge, Gt };
enum class Domain { Int, Nat };

struct Formula;
using Form = std::shared_ptr<const Formula>;

struct Formula {
    enum class Kind { True, False, Atom, Div, Not, And, Or, Exists, Forall };
    Kind kind = Kind::True;
    Rel rel = Rel::Le;
    LinTerm lhs, rhs;   // Atom: lhs rel rhs
    Int modulus;        // Div: modulus | term
    LinTerm term;
    std::vector<Form> kids;
    VarId var = -1;     // quantifiers
    Domain dom = Domain::Int;
};

Form f_true();
Form f_false();
Form f_bool(bool b);
Form f_atom(Rel r, const LinTerm &a, const LinTerm &b);
Form f_div(const Int &m, const LinTerm &t);
Form f_not(const Form &f);
Form f_and(std::vector<Form> fs);
Form f_or(std::vector<Form> fs);
Form f_and(const Form &a, const Form &b);
Form f_or(const Form &a, const Form &b);
Form f_implies(const Form &a, const Form &b);
Form f_exists(VarId v, Domain d, const Form &body);
Form f_forall(VarId v, Domain d, const Form &body);
Form f_exists(const std::vector<std::pair<VarId, Domain>> &vs, const Form &body);
Form f_forall(const std::vector<std::pair<VarId, Domain>> &vs, const Form &body);

struct FreeVariableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnassignedVariable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::set<VarId> free_vars(const Form &f);
bool is_quantifier_free(const Form &f);

/// Cooper-style quantifier elimination; the result may contain divisibility atoms.
Form eliminate(const Form &f);
/// Truth value of a closed sentence over the integers.
bool decide(const Form &sentence);
/// Evaluation of a quantifier-free formula.
bool evaluate(const Form &f, const Assignment &a);
/// Existential closure of a quantifier-free formula (all free variables range over Z).
bool satisfiable(const Form &qf);

std::string to_sexpr(const Form &f);
std::string to_sexpr(const LinTerm &t);
/// Reads the formula syntax used by the hidden decide-lia subcommand.
Form parse_formula(const std::string &text);

struct Stats {
    unsigned long sat_calls = 0;
    unsigned long qe_calls = 0;
};
Stats &stats();

} // namespace lchc::pres

#endif
