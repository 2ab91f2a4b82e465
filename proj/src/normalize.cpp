#include "lchc/syntax.hpp"
#include "lchc/typesys.hpp"

#include <set>

namespace lchc {

namespace {

class Fresh {
public:
    explicit Fresh(const Clause &c) {
        for (auto &v : c.vars)
            used_.insert(v.name);
    }
    void reserve(const std::string &n) { used_.insert(n); }
    std::string next(const std::string &hint) {
        for (;;) {
            std::string n = "_" + hint + std::to_string(k_++);
            if (used_.insert(n).second)
                return n;
        }
    }

private:
    std::set<std::string> used_;
    int k_ = 1;
};

// Moves existential binders to the clause level, renaming apart.
BodyP hoist_exists(const BodyP &b, Clause &c, Fresh &fresh, const std::map<std::string, TermP> &ren) {
    switch (b->k) {
    case Body::K::True:
    case Body::K::False:
        return b;
    case Body::K::AtomK:
        return ren.empty() ? b : b_atom(subst_atom(b->atom, ren));
    case Body::K::And:
    case Body::K::Or: {
        auto r = std::make_shared<Body>(*b);
        for (auto &k : r->kids)
            k = hoist_exists(k, c, fresh, ren);
        return r;
    }
    case Body::K::Exists: {
        auto inner = ren;
        for (auto &v : b->binders) {
            std::string n = c.var(v.name) ? fresh.next(v.name) : v.name;
            fresh.reserve(n);
            c.vars.push_back({n, v.sort});
            if (n != v.name)
                inner[v.name] = t_var(n);
        }
        return hoist_exists(b->kids[0], c, fresh, inner);
    }
    }
    return b;
}

// Disjunctive normal form as a list of atom conjunctions.
std::vector<std::vector<Atom>> dnf(const BodyP &b) {
    switch (b->k) {
    case Body::K::True: return {{}};
    case Body::K::False: return {};
    case Body::K::AtomK: return {{b->atom}};
    case Body::K::Or: {
        std::vector<std::vector<Atom>> out;
        for (auto &k : b->kids) {
            auto d = dnf(k);
            out.insert(out.end(), d.begin(), d.end());
        }
        return out;
    }
    case Body::K::And: {
        std::vector<std::vector<Atom>> acc{{}};
        for (auto &k : b->kids) {
            auto d = dnf(k);
            std::vector<std::vector<Atom>> next;
            for (auto &a : acc)
                for (auto &x : d) {
                    auto v = a;
                    v.insert(v.end(), x.begin(), x.end());
                    next.push_back(std::move(v));
                }
            acc = std::move(next);
        }
        return acc;
    }
    case Body::K::Exists: return dnf(b->kids[0]);
    }
    return {};
}

Env env_of(const Clause &c) {
    Env e;
    for (auto &v : c.vars)
        e[v.name] = v.sort;
    return e;
}

bool is_arith(const TermP &t) {
    switch (t->k) {
    case Term::K::Add:
    case Term::K::Sub:
    case Term::K::Neg:
    case Term::K::Scale:
    case Term::K::Comp: return true;
    default: return false;
    }
}

Atom eq_atom(const std::string &v, const TermP &t) {
    Atom a;
    a.k = Atom::K::Bg;
    a.rel = Rel::Eq;
    a.lhs = t_var(v, t->loc);
    a.rhs = t;
    a.loc = t->loc;
    return a;
}

// Replaces arithmetic arguments of applications by fresh W variables.
TermP hoist_args(const TermP &t, Clause &c, Fresh &fresh, std::vector<Atom> &extra, const Problem &p) {
    if (t->k != Term::K::App)
        return t;
    TermP f = hoist_args(t->a, c, fresh, extra, p);
    TermP x = t->b;
    if (is_arith(x)) {
        std::string n = fresh.next("w");
        c.vars.push_back({n, infer_sort(x, env_of(c), p)});
        extra.push_back(eq_atom(n, x));
        x = t_var(n, x->loc);
    } else {
        x = hoist_args(x, c, fresh, extra, p);
    }
    if (f == t->a && x == t->b)
        return t;
    return t_app(f, x, t->loc);
}

} // namespace

Clause make_limit_clause(const Problem &p, const std::string &pred) {
    SortP s = p.decl(pred);
    auto args = sort_args(s);
    size_t j = *w_position(s);
    Clause c;
    c.head = pred;
    std::vector<TermP> body_args;
    for (size_t i = 0; i < args.size(); ++i) {
        std::string n = "x" + std::to_string(i + 1);
        c.vars.push_back({n, args[i]});
        c.head_args.push_back(t_var(n));
        body_args.push_back(t_var(n));
    }
    c.vars.push_back({"y", s_w()});
    body_args[j] = t_var("y");
    Atom ord;
    ord.k = Atom::K::Bg;
    ord.rel = Rel::Le;
    // upward: body value below head value; downward: head value below body value
    if (p.dir == Direction::Upward) {
        ord.lhs = t_var("y");
        ord.rhs = c.head_args[j];
    } else {
        ord.lhs = c.head_args[j];
        ord.rhs = t_var("y");
    }
    Atom rec;
    rec.k = Atom::K::Fg;
    rec.fg = t_apps(t_pred(pred), body_args);
    c.body = b_and({b_atom(ord), b_atom(rec)});
    return c;
}

bool is_limit_clause(const Problem &p, const Clause &c) {
    if (c.goal)
        return false;
    SortP s = p.decl(c.head);
    if (!s)
        return false;
    auto wpos = w_position(s);
    if (!wpos)
        return false;
    std::set<std::string> hv;
    for (auto &a : c.head_args)
        if (a->k != Term::K::Var || !hv.insert(a->name).second)
            return false;
    std::vector<Atom> atoms;
    try {
        atoms = body_atoms(c);
    } catch (const std::logic_error &) {
        return false;
    }
    if (atoms.size() != 2)
        return false;
    const Atom *ord = nullptr, *rec = nullptr;
    for (auto &a : atoms) {
        if (a.k == Atom::K::Bg)
            ord = &a;
        else if (a.k == Atom::K::Fg)
            rec = &a;
    }
    if (!ord || !rec)
        return false;
    std::vector<TermP> args;
    TermP h = spine(rec->fg, args);
    if (h->k != Term::K::Pred || h->name != c.head || args.size() != c.head_args.size())
        return false;
    for (size_t i = 0; i < args.size(); ++i) {
        if (i == *wpos)
            continue;
        if (args[i]->k != Term::K::Var || args[i]->name != c.head_args[i]->name)
            return false;
    }
    const TermP &y = args[*wpos];
    const std::string &x = c.head_args[*wpos]->name;
    if (y->k != Term::K::Var || y->name == x || hv.count(y->name))
        return false;
    const VarDecl *yd = c.var(y->name);
    if (!yd || yd->sort->k != Sort::K::W)
        return false;
    if (ord->lhs->k != Term::K::Var || ord->rhs->k != Term::K::Var)
        return false;
    // normalize to "small <= large"
    std::string small, large;
    if (ord->rel == Rel::Le) {
        small = ord->lhs->name;
        large = ord->rhs->name;
    } else if (ord->rel == Rel::Ge) {
        small = ord->rhs->name;
        large = ord->lhs->name;
    } else {
        return false;
    }
    if (p.dir == Direction::Upward)
        return small == y->name && large == x;
    return small == x && large == y->name;
}

Problem normalize_problem(const Problem &in) {
    Problem p = in;
    p.clauses.clear();
    p.goals.clear();
    auto run = [&](const Clause &src) {
        Clause base = src;
        Fresh fresh(base);
        base.body = hoist_exists(src.body, base, fresh, {});
        for (auto &conj : dnf(base.body)) {
            Clause c = base;
            Fresh fr = fresh;
            std::vector<Atom> atoms;
            for (auto &a : conj) {
                if (a.k != Atom::K::Fg) {
                    atoms.push_back(a);
                    continue;
                }
                std::vector<Atom> extra;
                Atom b = a;
                b.fg = hoist_args(a.fg, c, fr, extra, p);
                atoms.insert(atoms.end(), extra.begin(), extra.end());
                atoms.push_back(b);
            }
            if (!c.goal) {
                auto want = sort_args(p.decl(c.head));
                std::set<std::string> seen;
                for (size_t i = 0; i < c.head_args.size(); ++i) {
                    const TermP &h = c.head_args[i];
                    if (h->k == Term::K::Var && seen.insert(h->name).second)
                        continue;
                    std::string n = fr.next("h");
                    c.vars.push_back({n, want[i]});
                    Atom e;
                    e.loc = h->loc;
                    e.lhs = t_var(n, h->loc);
                    e.rhs = h;
                    if (want[i]->k == Sort::K::Fin) {
                        e.k = Atom::K::Eqs;
                    } else {
                        e.k = Atom::K::Bg;
                        e.rel = Rel::Eq;
                    }
                    atoms.push_back(e);
                    c.head_args[i] = t_var(n, h->loc);
                    seen.insert(n);
                }
            }
            std::vector<BodyP> ks;
            for (auto &a : atoms)
                ks.push_back(b_atom(a));
            c.body = b_and(std::move(ks));
            (c.goal ? p.goals : p.clauses).push_back(std::move(c));
        }
    };
    for (auto &c : in.clauses)
        run(c);
    for (auto &g : in.goals)
        run(g);
    if (!p.require_explicit_limits) {
        for (auto &[n, s] : p.decls) {
            if (!w_position(s))
                continue;
            bool found = false;
            for (auto &c : p.clauses)
                if (c.head == n && is_limit_clause(p, c))
                    found = true;
            if (!found)
                p.clauses.push_back(make_limit_clause(p, n));
        }
    }
    return p;
}

} // namespace lchc
