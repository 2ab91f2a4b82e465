#include "lchc/syntax.hpp"
#include "lchc/typesys.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace lchc {

// ---------------------------------------------------------------- sorts

namespace {

SortP base(Sort::K k) {
    auto s = std::make_shared<Sort>();
    s->k = k;
    return s;
}

} // namespace

SortP s_prop() {
    static SortP s = base(Sort::K::Prop);
    return s;
}
SortP s_fin() {
    static SortP s = base(Sort::K::Fin);
    return s;
}
SortP s_w() {
    static SortP s = base(Sort::K::W);
    return s;
}
SortP s_num() {
    static SortP s = base(Sort::K::Num);
    return s;
}

SortP s_arrow(SortP a, SortP b) {
    auto s = std::make_shared<Sort>();
    s->k = Sort::K::Arrow;
    s->arg = std::move(a);
    s->res = std::move(b);
    return s;
}

SortP s_arrows(const std::vector<SortP> &args, SortP res) {
    for (auto it = args.rbegin(); it != args.rend(); ++it)
        res = s_arrow(*it, res);
    return res;
}

bool sort_eq(const SortP &a, const SortP &b) {
    if (a == b)
        return true;
    if (!a || !b || a->k != b->k)
        return false;
    if (a->k != Sort::K::Arrow)
        return true;
    return sort_eq(a->arg, b->arg) && sort_eq(a->res, b->res);
}

std::vector<SortP> sort_args(const SortP &s) {
    std::vector<SortP> out;
    for (SortP c = s; c->k == Sort::K::Arrow; c = c->res)
        out.push_back(c->arg);
    return out;
}

SortP sort_target(const SortP &s) {
    SortP c = s;
    while (c->k == Sort::K::Arrow)
        c = c->res;
    return c;
}

bool is_relational(const SortP &s) { return sort_target(s)->k == Sort::K::Prop; }

std::string sort_str(const SortP &s, const std::string &fin_name) {
    switch (s->k) {
    case Sort::K::Prop: return "o";
    case Sort::K::Fin: return fin_name;
    case Sort::K::W: return "W";
    case Sort::K::Num: return "Num";
    case Sort::K::Arrow: {
        std::string r = "(->";
        for (auto &a : sort_args(s))
            r += " " + sort_str(a, fin_name);
        return r + " " + sort_str(sort_target(s), fin_name) + ")";
    }
    }
    return "?";
}

// ---------------------------------------------------------------- terms

namespace {

std::shared_ptr<Term> mk_term(Term::K k, Loc l) {
    auto t = std::make_shared<Term>();
    t->k = k;
    t->loc = l;
    return t;
}

} // namespace

TermP t_var(const std::string &n, Loc l) {
    auto t = mk_term(Term::K::Var, l);
    t->name = n;
    return t;
}
TermP t_pred(const std::string &n, Loc l) {
    auto t = mk_term(Term::K::Pred, l);
    t->name = n;
    return t;
}
TermP t_sconst(const std::string &n, Loc l) {
    auto t = mk_term(Term::K::SConst, l);
    t->name = n;
    return t;
}
TermP t_bool(bool b, Loc l) {
    auto t = mk_term(Term::K::Bool, l);
    t->bval = b;
    return t;
}
TermP t_wlit(std::vector<Int> v, bool tuple, Loc l) {
    auto t = mk_term(Term::K::WLit, l);
    t->tuple = std::move(v);
    t->is_tuple = tuple;
    return t;
}
TermP t_app(TermP f, TermP x, Loc l) {
    auto t = mk_term(Term::K::App, l);
    t->a = std::move(f);
    t->b = std::move(x);
    return t;
}
TermP t_apps(TermP f, const std::vector<TermP> &xs) {
    for (auto &x : xs)
        f = t_app(f, x, f->loc);
    return f;
}
TermP t_binop(Term::K k, TermP a, TermP b, Loc l) {
    auto t = mk_term(k, l);
    t->a = std::move(a);
    t->b = std::move(b);
    return t;
}
TermP t_neg(TermP a, Loc l) {
    auto t = mk_term(Term::K::Neg, l);
    t->a = std::move(a);
    return t;
}
TermP t_scale(Int k, TermP a, Loc l) {
    auto t = mk_term(Term::K::Scale, l);
    t->factor = std::move(k);
    t->a = std::move(a);
    return t;
}
TermP t_comp(TermP a, int i, Loc l) {
    auto t = mk_term(Term::K::Comp, l);
    t->a = std::move(a);
    t->comp = i;
    return t;
}

TermP spine(const TermP &t, std::vector<TermP> &args) {
    args.clear();
    TermP h = t;
    while (h->k == Term::K::App) {
        args.push_back(h->b);
        h = h->a;
    }
    std::reverse(args.begin(), args.end());
    return h;
}

bool term_eq(const TermP &a, const TermP &b) {
    if (a == b)
        return true;
    if (a->k != b->k)
        return false;
    switch (a->k) {
    case Term::K::Var:
    case Term::K::Pred:
    case Term::K::SConst: return a->name == b->name;
    case Term::K::Bool: return a->bval == b->bval;
    case Term::K::WLit: return a->tuple == b->tuple && a->is_tuple == b->is_tuple;
    case Term::K::Add:
    case Term::K::Sub:
    case Term::K::App: return term_eq(a->a, b->a) && term_eq(a->b, b->b);
    case Term::K::Neg: return term_eq(a->a, b->a);
    case Term::K::Scale: return a->factor == b->factor && term_eq(a->a, b->a);
    case Term::K::Comp: return a->comp == b->comp && term_eq(a->a, b->a);
    }
    return false;
}

std::string term_str(const TermP &t) {
    switch (t->k) {
    case Term::K::Var:
    case Term::K::Pred:
    case Term::K::SConst: return t->name;
    case Term::K::Bool: return t->bval ? "true" : "false";
    case Term::K::WLit: {
        if (!t->is_tuple)
            return t->tuple[0].get_str();
        std::string s = "(tuple";
        for (auto &v : t->tuple)
            s += " " + v.get_str();
        return s + ")";
    }
    case Term::K::Add: return "(+ " + term_str(t->a) + " " + term_str(t->b) + ")";
    case Term::K::Sub: return "(- " + term_str(t->a) + " " + term_str(t->b) + ")";
    case Term::K::Neg: return "(- " + term_str(t->a) + ")";
    case Term::K::Scale: return "(* " + t->factor.get_str() + " " + term_str(t->a) + ")";
    case Term::K::Comp: return "(comp " + term_str(t->a) + " " + std::to_string(t->comp) + ")";
    case Term::K::App: {
        std::vector<TermP> args;
        TermP h = spine(t, args);
        std::string s = "(" + term_str(h);
        for (auto &a : args)
            s += " " + term_str(a);
        return s + ")";
    }
    }
    return "?";
}

TermP subst_term(const TermP &t, const std::map<std::string, TermP> &s) {
    switch (t->k) {
    case Term::K::Var: {
        auto it = s.find(t->name);
        return it == s.end() ? t : it->second;
    }
    case Term::K::Pred:
    case Term::K::SConst:
    case Term::K::Bool:
    case Term::K::WLit: return t;
    case Term::K::Add:
    case Term::K::Sub:
    case Term::K::App: {
        TermP a = subst_term(t->a, s), b = subst_term(t->b, s);
        if (a == t->a && b == t->b)
            return t;
        auto r = std::make_shared<Term>(*t);
        r->a = a;
        r->b = b;
        return r;
    }
    case Term::K::Neg:
    case Term::K::Scale:
    case Term::K::Comp: {
        TermP a = subst_term(t->a, s);
        if (a == t->a)
            return t;
        auto r = std::make_shared<Term>(*t);
        r->a = a;
        return r;
    }
    }
    return t;
}

void term_vars(const TermP &t, std::vector<std::string> &out) {
    switch (t->k) {
    case Term::K::Var:
        if (std::find(out.begin(), out.end(), t->name) == out.end())
            out.push_back(t->name);
        return;
    case Term::K::Add:
    case Term::K::Sub:
    case Term::K::App:
        term_vars(t->a, out);
        term_vars(t->b, out);
        return;
    case Term::K::Neg:
    case Term::K::Scale:
    case Term::K::Comp:
        term_vars(t->a, out);
        return;
    default:
        return;
    }
}

// ---------------------------------------------------------------- atoms and bodies

namespace {

const char *rel_name(Rel r) {
    switch (r) {
    case Rel::Le: return "leq";
    case Rel::Lt: return "lt";
    case Rel::Eq: return "eq";
    case Rel::Ne: return "neq";
    case Rel::Ge: return "geq";
    case Rel::Gt: return "gt";
    }
    return "?";
}

} // namespace

bool atom_eq(const Atom &a, const Atom &b) {
    if (a.k != b.k)
        return false;
    switch (a.k) {
    case Atom::K::Bg: return a.rel == b.rel && term_eq(a.lhs, b.lhs) && term_eq(a.rhs, b.rhs);
    case Atom::K::Eqs: return term_eq(a.lhs, b.lhs) && term_eq(a.rhs, b.rhs);
    case Atom::K::Fg: return term_eq(a.fg, b.fg);
    }
    return false;
}

std::string atom_str(const Atom &a) {
    switch (a.k) {
    case Atom::K::Bg: return std::string("(") + rel_name(a.rel) + " " + term_str(a.lhs) + " " + term_str(a.rhs) + ")";
    case Atom::K::Eqs: return "(eqs " + term_str(a.lhs) + " " + term_str(a.rhs) + ")";
    case Atom::K::Fg: {
        if (a.fg->k == Term::K::App)
            return term_str(a.fg);
        return term_str(a.fg);
    }
    }
    return "?";
}

Atom subst_atom(const Atom &a, const std::map<std::string, TermP> &s) {
    Atom r = a;
    if (r.lhs)
        r.lhs = subst_term(r.lhs, s);
    if (r.rhs)
        r.rhs = subst_term(r.rhs, s);
    if (r.fg)
        r.fg = subst_term(r.fg, s);
    return r;
}

BodyP b_true() {
    static BodyP t = std::make_shared<const Body>();
    return t;
}

BodyP b_atom(Atom a) {
    auto b = std::make_shared<Body>();
    b->k = Body::K::AtomK;
    b->loc = a.loc;
    b->atom = std::move(a);
    return b;
}

BodyP b_and(std::vector<BodyP> ks) {
    if (ks.empty())
        return b_true();
    if (ks.size() == 1)
        return ks[0];
    auto b = std::make_shared<Body>();
    b->k = Body::K::And;
    b->kids = std::move(ks);
    return b;
}

BodyP b_or(std::vector<BodyP> ks) {
    if (ks.size() == 1)
        return ks[0];
    auto b = std::make_shared<Body>();
    b->k = Body::K::Or;
    b->kids = std::move(ks);
    return b;
}

BodyP b_exists(std::vector<VarDecl> vs, BodyP body) {
    auto b = std::make_shared<Body>();
    b->k = Body::K::Exists;
    b->binders = std::move(vs);
    b->kids = {std::move(body)};
    return b;
}

namespace {

bool body_eq(const BodyP &a, const BodyP &b) {
    if (a->k != b->k || a->kids.size() != b->kids.size() || a->binders.size() != b->binders.size())
        return false;
    if (a->k == Body::K::AtomK && !atom_eq(a->atom, b->atom))
        return false;
    for (size_t i = 0; i < a->binders.size(); ++i)
        if (a->binders[i].name != b->binders[i].name || !sort_eq(a->binders[i].sort, b->binders[i].sort))
            return false;
    for (size_t i = 0; i < a->kids.size(); ++i)
        if (!body_eq(a->kids[i], b->kids[i]))
            return false;
    return true;
}

void flatten(const BodyP &b, std::vector<Atom> &out) {
    switch (b->k) {
    case Body::K::True: return;
    case Body::K::AtomK: out.push_back(b->atom); return;
    case Body::K::And:
        for (auto &k : b->kids)
            flatten(k, out);
        return;
    case Body::K::False:
        // a false body makes the clause vacuous; normalization drops such clauses
        throw std::logic_error("body_atoms: false body");
    default:
        throw std::logic_error("body_atoms: body is not a conjunction");
    }
}

std::string binders_str(const std::vector<VarDecl> &vs, const std::string &fin) {
    std::string s = "(";
    for (size_t i = 0; i < vs.size(); ++i) {
        if (i)
            s += " ";
        s += "(" + vs[i].name + " " + sort_str(vs[i].sort, fin) + ")";
    }
    return s + ")";
}

std::string body_str(const BodyP &b, const std::string &fin) {
    switch (b->k) {
    case Body::K::True: return "true";
    case Body::K::False: return "false";
    case Body::K::AtomK: return atom_str(b->atom);
    case Body::K::And:
    case Body::K::Or: {
        std::string s = b->k == Body::K::And ? "(and" : "(or";
        for (auto &k : b->kids)
            s += " " + body_str(k, fin);
        return s + ")";
    }
    case Body::K::Exists: return "(exists " + binders_str(b->binders, fin) + " " + body_str(b->kids[0], fin) + ")";
    }
    return "?";
}

} // namespace

const VarDecl *Clause::var(const std::string &n) const {
    for (auto &v : vars)
        if (v.name == n)
            return &v;
    return nullptr;
}

std::vector<Atom> body_atoms(const Clause &c) {
    std::vector<Atom> out;
    flatten(c.body, out);
    return out;
}

SortP Problem::decl(const std::string &pred) const {
    for (auto &[n, s] : decls)
        if (n == pred)
            return s;
    return nullptr;
}

int Problem::fin_index(const std::string &c) const {
    for (size_t i = 0; i < fin_elems.size(); ++i)
        if (fin_elems[i] == c)
            return static_cast<int>(i);
    return -1;
}

std::optional<size_t> w_position(const SortP &s) {
    auto args = sort_args(s);
    for (size_t i = 0; i < args.size(); ++i)
        if (args[i]->k == Sort::K::W)
            return i;
    return std::nullopt;
}

// ---------------------------------------------------------------- printing

std::string clause_str(const Clause &c, const std::string &fin) {
    std::string s = c.goal ? "(goal " : "(clause ";
    s += binders_str(c.vars, fin);
    if (!c.goal) {
        s += " (head (" + c.head;
        for (auto &a : c.head_args)
            s += " " + term_str(a);
        s += "))";
    }
    return s + " (body " + body_str(c.body, fin) + "))";
}

std::string print_problem(const Problem &p) {
    std::ostringstream o;
    if (p.theory == Theory::LIA)
        o << "(theory (lia))\n";
    else
        o << "(theory (nat " << p.dim << "))\n";
    o << "(direction " << (p.dir == Direction::Upward ? "upward" : "downward") << ")\n";
    if (!p.fin_elems.empty()) {
        o << "(finsort " << p.fin_name << " (";
        for (size_t i = 0; i < p.fin_elems.size(); ++i)
            o << (i ? " " : "") << p.fin_elems[i];
        o << "))\n";
    }
    if (p.require_explicit_limits)
        o << "(options require-explicit-limits)\n";
    for (auto &[n, s] : p.decls)
        o << "(declare " << n << " " << sort_str(s, p.fin_name) << ")\n";
    for (auto &c : p.clauses)
        o << clause_str(c, p.fin_name) << "\n";
    for (auto &g : p.goals)
        o << clause_str(g, p.fin_name) << "\n";
    return o.str();
}

namespace {

bool clause_eq(const Clause &a, const Clause &b) {
    if (a.goal != b.goal || a.head != b.head || a.vars.size() != b.vars.size() ||
        a.head_args.size() != b.head_args.size())
        return false;
    for (size_t i = 0; i < a.vars.size(); ++i)
        if (a.vars[i].name != b.vars[i].name || !sort_eq(a.vars[i].sort, b.vars[i].sort))
            return false;
    for (size_t i = 0; i < a.head_args.size(); ++i)
        if (!term_eq(a.head_args[i], b.head_args[i]))
            return false;
    return body_eq(a.body, b.body);
}

} // namespace

bool problem_eq(const Problem &a, const Problem &b) {
    if (a.theory != b.theory || a.dim != b.dim || a.dir != b.dir || a.fin_elems != b.fin_elems ||
        a.require_explicit_limits != b.require_explicit_limits || a.decls.size() != b.decls.size() ||
        a.clauses.size() != b.clauses.size() || a.goals.size() != b.goals.size())
        return false;
    if (!a.fin_elems.empty() && a.fin_name != b.fin_name)
        return false;
    for (size_t i = 0; i < a.decls.size(); ++i)
        if (a.decls[i].first != b.decls[i].first || !sort_eq(a.decls[i].second, b.decls[i].second))
            return false;
    for (size_t i = 0; i < a.clauses.size(); ++i)
        if (!clause_eq(a.clauses[i], b.clauses[i]))
            return false;
    for (size_t i = 0; i < a.goals.size(); ++i)
        if (!clause_eq(a.goals[i], b.goals[i]))
            return false;
    return true;
}

// ---------------------------------------------------------------- parsing

namespace {

const std::set<std::string> kReserved = {"and", "or", "exists", "true", "false", "leq", "lt", "geq", "gt",
                                         "eq", "neq", "eqs", "tuple", "+", "-", "*", "comp", "->"};

class Parser {
public:
    Problem p;

    void top(const SExprP &e) {
        if (e->is_atom || e->items.empty() || !e->items[0]->is_atom)
            throw ParseError(e->loc, "expected a top-level form",
                             {"theory", "direction", "finsort", "declare", "clause", "goal", "options"});
        const std::string &h = e->items[0]->atom;
        if (h == "theory")
            theory(e);
        else if (h == "direction")
            direction(e);
        else if (h == "finsort")
            finsort(e);
        else if (h == "options")
            options(e);
        else if (h == "declare")
            declare(e);
        else if (h == "clause" || h == "goal")
            clause(e, h == "goal");
        else
            throw ParseError(e->items[0]->loc, "unknown top-level form '" + h + "'",
                             {"theory", "direction", "finsort", "declare", "clause", "goal", "options"});
    }

private:
    std::set<std::string> seen_;

    void once(const SExprP &e, const std::string &what) {
        if (!seen_.insert(what).second)
            throw ParseError(e->loc, "duplicate '" + what + "' form");
    }

    static const SExprP &item(const SExprP &e, size_t i, const std::string &what) {
        if (e->is_atom || e->items.size() <= i)
            throw ParseError(e->loc, "missing " + what, {what});
        return e->items[i];
    }

    static const std::string &ident(const SExprP &e, const std::string &what) {
        if (!e->is_atom || e->is_int())
            throw ParseError(e->loc, "expected " + what, {what});
        return e->atom;
    }

    void theory(const SExprP &e) {
        once(e, "theory");
        const auto &t = item(e, 1, "theory");
        if (t->head_is("lia") && t->items.size() == 1) {
            p.theory = Theory::LIA;
            p.dim = 1;
        } else if (t->head_is("nat") && t->items.size() == 2 && t->items[1]->is_int()) {
            p.theory = Theory::Nat;
            p.dim = std::stoi(t->items[1]->atom);
            if (p.dim < 1)
                throw ParseError(t->items[1]->loc, "dimension must be at least 1");
        } else {
            throw ParseError(t->loc, "expected (lia) or (nat <d>)", {"(lia)", "(nat d)"});
        }
    }

    void direction(const SExprP &e) {
        once(e, "direction");
        const auto &d = ident(item(e, 1, "direction"), "upward or downward");
        if (d == "upward")
            p.dir = Direction::Upward;
        else if (d == "downward")
            p.dir = Direction::Downward;
        else
            throw ParseError(e->items[1]->loc, "expected upward or downward", {"upward", "downward"});
    }

    void finsort(const SExprP &e) {
        once(e, "finsort");
        p.fin_name = ident(item(e, 1, "sort name"), "sort name");
        const auto &l = item(e, 2, "element list");
        if (l->is_atom || l->items.empty())
            throw ParseError(l->loc, "expected a non-empty element list");
        for (auto &x : l->items) {
            const auto &n = ident(x, "element name");
            if (p.fin_index(n) >= 0)
                throw ParseError(x->loc, "duplicate element '" + n + "'");
            p.fin_elems.push_back(n);
        }
    }

    void options(const SExprP &e) {
        for (size_t i = 1; i < e->items.size(); ++i) {
            const auto &o = ident(e->items[i], "option");
            if (o == "require-explicit-limits")
                p.require_explicit_limits = true;
            else
                throw ParseError(e->items[i]->loc, "unknown option '" + o + "'", {"require-explicit-limits"});
        }
    }

    SortP sort(const SExprP &e) {
        if (e->is_atom) {
            if (e->atom == "o")
                return s_prop();
            if (e->atom == "W")
                return s_w();
            if (e->atom == p.fin_name || e->atom == "S")
                return s_fin();
            throw ParseError(e->loc, "unknown sort '" + e->atom + "'", {"o", "W", p.fin_name, "(->"});
        }
        if (!e->head_is("->") || e->items.size() < 2)
            throw ParseError(e->loc, "malformed sort", {"(->"});
        std::vector<SortP> args;
        for (size_t i = 1; i + 1 < e->items.size(); ++i)
            args.push_back(sort(e->items[i]));
        return s_arrows(args, sort(e->items.back()));
    }

    void declare(const SExprP &e) {
        if (e->items.size() != 3)
            throw ParseError(e->loc, "expected (declare <Pred> <sort>)");
        const auto &n = ident(e->items[1], "predicate name");
        if (kReserved.count(n))
            throw ParseError(e->items[1]->loc, "'" + n + "' is reserved");
        if (p.decl(n))
            throw ParseError(e->items[1]->loc, "duplicate declaration of '" + n + "'");
        if (p.fin_index(n) >= 0)
            throw ParseError(e->items[1]->loc, "'" + n + "' is already an element of the finite sort");
        p.decls.emplace_back(n, sort(e->items[2]));
    }

    std::vector<VarDecl> binders(const SExprP &e) {
        if (e->is_atom)
            throw ParseError(e->loc, "expected a variable list", {"("});
        std::vector<VarDecl> vs;
        for (auto &b : e->items) {
            if (b->is_atom || b->items.size() != 2)
                throw ParseError(b->loc, "expected (<var> <sort>)");
            const auto &n = ident(b->items[0], "variable name");
            if (kReserved.count(n) || p.decl(n) || p.fin_index(n) >= 0)
                throw ParseError(b->items[0]->loc, "variable '" + n + "' shadows a symbol");
            for (auto &v : vs)
                if (v.name == n)
                    throw ParseError(b->items[0]->loc, "duplicate variable '" + n + "'");
            vs.push_back({n, sort(b->items[1])});
        }
        return vs;
    }

    Env env_;

    TermP term(const SExprP &e) {
        if (e->is_atom) {
            if (e->is_int())
                return t_wlit({Int(e->atom)}, false, e->loc);
            if (e->atom == "true" || e->atom == "false")
                return t_bool(e->atom == "true", e->loc);
            if (env_.count(e->atom))
                return t_var(e->atom, e->loc);
            if (p.decl(e->atom))
                return t_pred(e->atom, e->loc);
            if (p.fin_index(e->atom) >= 0)
                return t_sconst(e->atom, e->loc);
            throw UnknownSymbol(e->loc, "unknown symbol '" + e->atom + "'");
        }
        if (e->items.empty())
            throw ParseError(e->loc, "empty term");
        const auto &h = e->items[0];
        if (h->is_atom) {
            const std::string &op = h->atom;
            if (op == "tuple") {
                std::vector<Int> v;
                for (size_t i = 1; i < e->items.size(); ++i) {
                    if (!e->items[i]->is_int())
                        throw ParseError(e->items[i]->loc, "tuple components must be integer literals");
                    v.emplace_back(e->items[i]->atom);
                }
                if (v.empty())
                    throw ParseError(e->loc, "empty tuple");
                return t_wlit(std::move(v), true, e->loc);
            }
            if (op == "+") {
                if (e->items.size() < 3)
                    throw ParseError(e->loc, "'+' takes at least two arguments");
                TermP t = term(e->items[1]);
                for (size_t i = 2; i < e->items.size(); ++i)
                    t = t_binop(Term::K::Add, t, term(e->items[i]), e->loc);
                return t;
            }
            if (op == "-") {
                if (e->items.size() == 2)
                    return t_neg(term(e->items[1]), e->loc);
                if (e->items.size() != 3)
                    throw ParseError(e->loc, "'-' takes one or two arguments");
                return t_binop(Term::K::Sub, term(e->items[1]), term(e->items[2]), e->loc);
            }
            if (op == "*") {
                if (e->items.size() != 3 || !e->items[1]->is_int())
                    throw ParseError(e->loc, "'*' expects an integer literal and a term");
                return t_scale(Int(e->items[1]->atom), term(e->items[2]), e->loc);
            }
            if (op == "comp") {
                if (e->items.size() != 3 || !e->items[2]->is_int())
                    throw ParseError(e->loc, "expected (comp <term> <index>)");
                int i = std::stoi(e->items[2]->atom);
                if (i < 1 || i > p.dim)
                    throw ParseError(e->items[2]->loc, "component index out of range");
                return t_comp(term(e->items[1]), i, e->loc);
            }
        }
        TermP f = term(h);
        for (size_t i = 1; i < e->items.size(); ++i)
            f = t_app(f, term(e->items[i]), e->loc);
        return f;
    }

    SortP check(const TermP &t) {
        try {
            return infer_sort(t, env_, p);
        } catch (const TypeError &err) {
            throw ParseError(err.loc, err.what());
        } catch (const UnboundVariable &err) {
            throw UnknownSymbol(err.loc, err.what());
        }
    }

    // Reports applications with too many arguments as arity errors.
    void arity(const TermP &t) {
        std::vector<TermP> args;
        TermP h = spine(t, args);
        for (auto &a : args)
            arity(a);
        if (args.empty())
            return;
        SortP hs;
        if (h->k == Term::K::Pred)
            hs = p.decl(h->name);
        else if (h->k == Term::K::Var)
            hs = env_.at(h->name);
        else
            return;
        if (sort_args(hs).size() < args.size())
            throw ArityMismatch(t->loc, "'" + h->name + "' takes " + std::to_string(sort_args(hs).size()) +
                                            " arguments, given " + std::to_string(args.size()));
    }

    bool numeric(const SortP &s) { return s->k == Sort::K::W || s->k == Sort::K::Num; }

    BodyP formula(const SExprP &e) {
        if (e->is_atom) {
            if (e->atom == "true")
                return b_true();
            if (e->atom == "false") {
                auto b = std::make_shared<Body>();
                b->k = Body::K::False;
                b->loc = e->loc;
                return b;
            }
        }
        if (!e->is_atom && !e->items.empty() && e->items[0]->is_atom) {
            const std::string &op = e->items[0]->atom;
            if (op == "and" || op == "or") {
                std::vector<BodyP> ks;
                for (size_t i = 1; i < e->items.size(); ++i)
                    ks.push_back(formula(e->items[i]));
                auto b = std::make_shared<Body>();
                b->k = op == "and" ? Body::K::And : Body::K::Or;
                b->kids = std::move(ks);
                b->loc = e->loc;
                return b;
            }
            if (op == "exists") {
                if (e->items.size() != 3)
                    throw ParseError(e->loc, "expected (exists (<binders>) <formula>)");
                auto vs = binders(e->items[1]);
                Env saved = env_;
                for (auto &v : vs) {
                    if (env_.count(v.name))
                        throw ParseError(e->items[1]->loc, "variable '" + v.name + "' shadows a clause variable");
                    env_[v.name] = v.sort;
                }
                BodyP inner = formula(e->items[2]);
                env_ = saved;
                auto b = b_exists(std::move(vs), inner);
                return b;
            }
            static const std::map<std::string, Rel> rels = {{"leq", Rel::Le}, {"lt", Rel::Lt}, {"eq", Rel::Eq},
                                                            {"neq", Rel::Ne}, {"geq", Rel::Ge}, {"gt", Rel::Gt}};
            auto it = rels.find(op);
            if (it != rels.end() || op == "eqs") {
                if (e->items.size() != 3)
                    throw ParseError(e->loc, "'" + op + "' expects two arguments");
                Atom a;
                a.loc = e->loc;
                a.lhs = term(e->items[1]);
                a.rhs = term(e->items[2]);
                arity(a.lhs);
                arity(a.rhs);
                SortP l = check(a.lhs), r = check(a.rhs);
                if (l->k == Sort::K::Fin && r->k == Sort::K::Fin && (op == "eqs" || op == "eq")) {
                    a.k = Atom::K::Eqs;
                } else if (op == "eqs") {
                    throw ParseError(e->loc, "'eqs' compares elements of the finite sort");
                } else {
                    if (!numeric(l) || !numeric(r) || !sort_eq(l, r))
                        throw ParseError(e->loc, "background atom '" + op + "' needs two numeric terms of one sort, got " +
                                                     sort_str(l) + " and " + sort_str(r));
                    a.k = Atom::K::Bg;
                    a.rel = it->second;
                }
                return b_atom(std::move(a));
            }
        }
        Atom a;
        a.k = Atom::K::Fg;
        a.loc = e->loc;
        a.fg = term(e);
        arity(a.fg);
        SortP s = check(a.fg);
        if (s->k != Sort::K::Prop)
            throw ParseError(e->loc, "expected a formula, found a term of sort " + sort_str(s, p.fin_name));
        return b_atom(std::move(a));
    }

    void clause(const SExprP &e, bool goal) {
        Clause c;
        c.goal = goal;
        c.loc = e->loc;
        c.vars = binders(item(e, 1, "variable list"));
        env_.clear();
        for (auto &v : c.vars)
            env_[v.name] = v.sort;
        size_t i = 2;
        if (!goal) {
            const auto &h = item(e, i++, "head");
            if (!h->head_is("head") || h->items.size() != 2)
                throw ParseError(h->loc, "expected (head <atom>)", {"(head"});
            const auto &ha = h->items[1];
            const SExprP &name = ha->is_atom ? ha : item(ha, 0, "head predicate");
            c.head = ident(name, "predicate name");
            SortP ps = p.decl(c.head);
            if (!ps)
                throw UnknownSymbol(name->loc, "undeclared predicate '" + c.head + "'");
            auto want = sort_args(ps);
            if (!ha->is_atom)
                for (size_t k = 1; k < ha->items.size(); ++k)
                    c.head_args.push_back(term(ha->items[k]));
            if (c.head_args.size() != want.size())
                throw ArityMismatch(ha->loc, "head '" + c.head + "' needs " + std::to_string(want.size()) +
                                                 " arguments, given " + std::to_string(c.head_args.size()));
            for (size_t k = 0; k < want.size(); ++k) {
                if (is_relational(want[k])) {
                    const TermP &a = c.head_args[k];
                    bool dup = false;
                    for (size_t m = 0; m < k; ++m)
                        if (a->k == Term::K::Var && c.head_args[m]->k == Term::K::Var && c.head_args[m]->name == a->name)
                            dup = true;
                    if (a->k != Term::K::Var || dup)
                        throw ParseError(a->loc, "relational head argument " + std::to_string(k + 1) + " of '" + c.head +
                                                     "' must be a variable not repeated in the head");
                }
                arity(c.head_args[k]);
                SortP s = check(c.head_args[k]);
                bool ok = sort_eq(s, want[k]) || (want[k]->k == Sort::K::W && s->k == Sort::K::W);
                if (!ok)
                    throw ParseError(c.head_args[k]->loc, "head argument " + std::to_string(k + 1) + " of '" + c.head +
                                                              "' has sort " + sort_str(s, p.fin_name) + ", expected " +
                                                              sort_str(want[k], p.fin_name));
            }
        }
        if (i < e->items.size()) {
            const auto &b = e->items[i++];
            if (!b->head_is("body") || b->items.size() != 2)
                throw ParseError(b->loc, "expected (body <formula>)", {"(body"});
            c.body = formula(b->items[1]);
        }
        if (i != e->items.size())
            throw ParseError(e->items[i]->loc, "unexpected trailing item", {")"});
        (goal ? p.goals : p.clauses).push_back(std::move(c));
    }
};

} // namespace

Problem parse_problem(const std::string &text) {
    Parser ps;
    auto forms = read_sexprs(text);
    // declarations first so clause order in the file does not matter
    for (auto &f : forms)
        if (!f->head_is("clause") && !f->head_is("goal"))
            ps.top(f);
    for (auto &f : forms)
        if (f->head_is("clause") || f->head_is("goal"))
            ps.top(f);
    return ps.p;
}

} // namespace lchc
