// Random Presburger formulas whose quantifiers are bounded, so brute force
// over the bound is exact and can be compared with quantifier elimination.
#ifndef LCHC_TESTS_QE_SAMPLING_HPP
#define LCHC_TESTS_QE_SAMPLING_HPP

#include "lchc/presburger.hpp"

#include <random>
#include <string>
#include <vector>

namespace qe_sampling {

using namespace lchc::pres;

constexpr int kBound = 5;   // bound variables range over [-kBound, kBound] (or [0, kBound])
constexpr int kCoeff = 4;   // coefficients in [-kCoeff, kCoeff]
constexpr int kMaxQuant = 3;

struct Gen {
    std::mt19937 rng;
    std::vector<VarId> free_vars;
    int quants = 0;
    int counter = 0;

    explicit Gen(unsigned seed) : rng(seed) {
        free_vars = {var_id("qe.x"), var_id("qe.z")};
    }
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

    LinTerm term(const std::vector<VarId> &scope) {
        LinTerm t(Int(pick(-6, 6)));
        for (auto v : scope)
            if (pick(0, 2) > 0)
                t = t + LinTerm::var(v) * Int(pick(-kCoeff, kCoeff));
        return t;
    }
    Form atom(const std::vector<VarId> &scope) {
        if (pick(0, 6) == 0)
            return f_div(Int(pick(2, 4)), term(scope));
        static const Rel rels[] = {Rel::Le, Rel::Lt, Rel::Eq, Rel::Ne, Rel::Ge, Rel::Gt};
        return f_atom(rels[pick(0, 5)], term(scope), term(scope));
    }
    Form form(std::vector<VarId> scope, int depth) {
        int c = depth <= 0 ? 0 : pick(0, 5);
        if (c >= 4 && quants < kMaxQuant) {
            ++quants;
            VarId y = var_id("qe.b" + std::to_string(counter++));
            bool nat = pick(0, 3) == 0;
            Domain d = nat ? Domain::Nat : Domain::Int;
            auto s = scope;
            s.push_back(y);
            Form lo = f_atom(Rel::Ge, LinTerm::var(y), LinTerm(Int(nat ? 0 : -kBound)));
            Form hi = f_atom(Rel::Le, LinTerm::var(y), LinTerm(Int(kBound)));
            Form body = form(s, depth - 1);
            if (pick(0, 1))
                return f_exists(y, d, f_and({lo, hi, body}));
            return f_forall(y, d, f_implies(f_and(lo, hi), body));
        }
        if (c == 3)
            return f_not(form(scope, depth - 1));
        if (c == 2 || c == 1) {
            std::vector<Form> ks{form(scope, depth - 1), form(scope, depth - 1)};
            return c == 1 ? f_and(ks) : f_or(ks);
        }
        return atom(scope);
    }
    Form next() {
        quants = 0;
        Form f = form(free_vars, 4);
        if (quants > 0)
            return f;
        VarId y = var_id("qe.b" + std::to_string(counter++));
        Form lo = f_atom(Rel::Ge, LinTerm::var(y), LinTerm(Int(-kBound)));
        Form hi = f_atom(Rel::Le, LinTerm::var(y), LinTerm(Int(kBound)));
        return f_exists(y, Domain::Int, f_and({lo, hi, atom({free_vars[0], free_vars[1], y}), f}));
    }
};

/// Direct evaluation with quantifiers expanded over their bound.
inline bool brute(const Form &f, Assignment &a) {
    switch (f->kind) {
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
        bool ex = f->kind == Formula::Kind::Exists;
        int lo = f->dom == Domain::Nat ? 0 : -kBound;
        for (int v = lo; v <= kBound; ++v) {
            a[f->var] = v;
            bool r = brute(f->kids[0], a);
            if (r == ex) {
                a.erase(f->var);
                return ex;
            }
        }
        a.erase(f->var);
        return !ex;
    }
    case Formula::Kind::Not: return !brute(f->kids[0], a);
    case Formula::Kind::And:
        for (auto &k : f->kids)
            if (!brute(k, a))
                return false;
        return true;
    case Formula::Kind::Or:
        for (auto &k : f->kids)
            if (brute(k, a))
                return true;
        return false;
    default: return evaluate(f, a);
    }
}

struct Result {
    int formulas = 0, samples = 0, mismatches = 0;
    std::string first_mismatch;
};

/// n formulas, k assignments of the free variables in [-8, 8] each.
inline Result run(int n, int k, unsigned seed) {
    Gen g(seed);
    Result r;
    for (int i = 0; i < n; ++i) {
        Form f = g.next();
        Form q = eliminate(f);
        ++r.formulas;
        for (int j = 0; j < k; ++j) {
            Assignment a{{g.free_vars[0], g.pick(-8, 8)}, {g.free_vars[1], g.pick(-8, 8)}};
            Assignment b = a;
            bool want = brute(f, b);
            bool got = is_quantifier_free(q) && evaluate(q, a);
            ++r.samples;
            if (want != got) {
                if (r.mismatches++ == 0)
                    r.first_mismatch = to_sexpr(f);
            }
        }
    }
    return r;
}

} // namespace qe_sampling

#endif
