#include "presburger_internal.hpp"
#include "lchc/sexpr.hpp"

#include <algorithm>
#include <mutex>
#include <unordered_map>

namespace lchc::pres {

namespace {

struct VarTable {
    std::mutex mu;
    std::unordered_map<std::string, VarId> ids;
    std::vector<std::string> names;
    long fresh = 0;
};

VarTable &vars() {
    static VarTable t;
    return t;
}

} // namespace

VarId var_id(const std::string &name) {
    auto &t = vars();
    std::lock_guard<std::mutex> g(t.mu);
    auto it = t.ids.find(name);
    if (it != t.ids.end())
        return it->second;
    VarId id = static_cast<VarId>(t.names.size());
    t.names.push_back(name);
    t.ids.emplace(name, id);
    return id;
}

const std::string &var_name(VarId v) {
    auto &t = vars();
    std::lock_guard<std::mutex> g(t.mu);
    return t.names.at(static_cast<size_t>(v));
}

VarId fresh_var(const std::string &hint) {
    auto &t = vars();
    std::string name;
    {
        std::lock_guard<std::mutex> g(t.mu);
        name = hint + "!" + std::to_string(t.fresh++);
    }
    return var_id(name);
}

Stats &stats() {
    static thread_local Stats s;
    return s;
}

// ---------------------------------------------------------------- LinTerm

LinTerm LinTerm::var(VarId v, const Int &coeff) {
    LinTerm t;
    if (coeff != 0)
        t.cs_.emplace_back(v, coeff);
    return t;
}

Int LinTerm::coeff(VarId v) const {
    auto it = std::lower_bound(cs_.begin(), cs_.end(), v,
                               [](const auto &p, VarId x) { return p.first < x; });
    if (it != cs_.end() && it->first == v)
        return it->second;
    return 0;
}

bool LinTerm::has(VarId v) const {
    auto it = std::lower_bound(cs_.begin(), cs_.end(), v,
                               [](const auto &p, VarId x) { return p.first < x; });
    return it != cs_.end() && it->first == v;
}

LinTerm LinTerm::operator+(const LinTerm &o) const {
    LinTerm r;
    r.c_ = c_ + o.c_;
    r.cs_.reserve(cs_.size() + o.cs_.size());
    size_t i = 0, j = 0;
    while (i < cs_.size() || j < o.cs_.size()) {
        if (j == o.cs_.size() || (i < cs_.size() && cs_[i].first < o.cs_[j].first)) {
            r.cs_.push_back(cs_[i++]);
        } else if (i == cs_.size() || o.cs_[j].first < cs_[i].first) {
            r.cs_.push_back(o.cs_[j++]);
        } else {
            Int s = cs_[i].second + o.cs_[j].second;
            if (s != 0)
                r.cs_.emplace_back(cs_[i].first, s);
            ++i;
            ++j;
        }
    }
    return r;
}

LinTerm LinTerm::operator-() const {
    LinTerm r;
    r.c_ = -c_;
    r.cs_ = cs_;
    for (auto &p : r.cs_)
        p.second = -p.second;
    return r;
}

LinTerm LinTerm::operator-(const LinTerm &o) const { return *this + (-o); }

LinTerm LinTerm::operator*(const Int &k) const {
    LinTerm r;
    if (k == 0)
        return r;
    r.c_ = c_ * k;
    r.cs_ = cs_;
    for (auto &p : r.cs_)
        p.second *= k;
    return r;
}

LinTerm LinTerm::without(VarId v) const {
    LinTerm r;
    r.c_ = c_;
    for (auto &p : cs_)
        if (p.first != v)
            r.cs_.push_back(p);
    return r;
}

LinTerm LinTerm::substitute(VarId v, const LinTerm &t) const {
    Int a = coeff(v);
    if (a == 0)
        return *this;
    return without(v) + t * a;
}

Int LinTerm::eval(const Assignment &a) const {
    Int r = c_;
    for (auto &p : cs_) {
        auto it = a.find(p.first);
        if (it == a.end())
            throw UnassignedVariable("unassigned variable " + var_name(p.first));
        r += p.second * it->second;
    }
    return r;
}

Int LinTerm::content() const {
    Int g = 0;
    for (auto &p : cs_)
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), p.second.get_mpz_t());
    return g;
}

bool LinTerm::operator<(const LinTerm &o) const {
    if (cs_.size() != o.cs_.size())
        return cs_.size() < o.cs_.size();
    for (size_t i = 0; i < cs_.size(); ++i) {
        if (cs_[i].first != o.cs_[i].first)
            return cs_[i].first < o.cs_[i].first;
        if (cs_[i].second != o.cs_[i].second)
            return cs_[i].second < o.cs_[i].second;
    }
    return c_ < o.c_;
}

std::string LinTerm::str() const { return to_sexpr(*this); }

// ---------------------------------------------------------------- Formula constructors

namespace {

Form mk(Formula f) { return std::make_shared<const Formula>(std::move(f)); }

} // namespace

Form f_true() {
    static Form t = mk(Formula{});
    return t;
}

Form f_false() {
    static Form f = [] {
        Formula x;
        x.kind = Formula::Kind::False;
        return mk(x);
    }();
    return f;
}

Form f_bool(bool b) { return b ? f_true() : f_false(); }

Form f_atom(Rel r, const LinTerm &a, const LinTerm &b) {
    LinTerm d = a - b;
    if (d.is_constant()) {
        const Int &c = d.constant();
        switch (r) {
        case Rel::Le: return f_bool(c <= 0);
        case Rel::Lt: return f_bool(c < 0);
        case Rel::Eq: return f_bool(c == 0);
        case Rel::Ne: return f_bool(c != 0);
        case Rel::Ge: return f_bool(c >= 0);
        case Rel::Gt: return f_bool(c > 0);
        }
    }
    Formula x;
    x.kind = Formula::Kind::Atom;
    x.rel = r;
    x.lhs = a;
    x.rhs = b;
    return mk(std::move(x));
}

Form f_div(const Int &m, const LinTerm &t) {
    if (t.is_constant() && m != 0)
        return f_bool(t.constant() % abs(m) == 0);
    Formula x;
    x.kind = Formula::Kind::Div;
    x.modulus = abs(m);
    x.term = t;
    return mk(std::move(x));
}

Form f_not(const Form &f) {
    if (f->kind == Formula::Kind::True)
        return f_false();
    if (f->kind == Formula::Kind::False)
        return f_true();
    if (f->kind == Formula::Kind::Not)
        return f->kids[0];
    Formula x;
    x.kind = Formula::Kind::Not;
    x.kids = {f};
    return mk(std::move(x));
}

static Form junction(Formula::Kind k, std::vector<Form> fs) {
    bool is_and = k == Formula::Kind::And;
    std::vector<Form> out;
    for (auto &f : fs) {
        if (f->kind == (is_and ? Formula::Kind::True : Formula::Kind::False))
            continue;
        if (f->kind == (is_and ? Formula::Kind::False : Formula::Kind::True))
            return is_and ? f_false() : f_true();
        if (f->kind == k)
            out.insert(out.end(), f->kids.begin(), f->kids.end());
        else
            out.push_back(f);
    }
    if (out.empty())
        return is_and ? f_true() : f_false();
    if (out.size() == 1)
        return out[0];
    Formula x;
    x.kind = k;
    x.kids = std::move(out);
    return mk(std::move(x));
}

Form f_and(std::vector<Form> fs) { return junction(Formula::Kind::And, std::move(fs)); }
Form f_or(std::vector<Form> fs) { return junction(Formula::Kind::Or, std::move(fs)); }
Form f_and(const Form &a, const Form &b) { return f_and(std::vector<Form>{a, b}); }
Form f_or(const Form &a, const Form &b) { return f_or(std::vector<Form>{a, b}); }
Form f_implies(const Form &a, const Form &b) { return f_or(f_not(a), b); }

static Form quant(Formula::Kind k, VarId v, Domain d, const Form &body) {
    Formula x;
    x.kind = k;
    x.var = v;
    x.dom = d;
    x.kids = {body};
    return mk(std::move(x));
}

Form f_exists(VarId v, Domain d, const Form &body) { return quant(Formula::Kind::Exists, v, d, body); }
Form f_forall(VarId v, Domain d, const Form &body) { return quant(Formula::Kind::Forall, v, d, body); }

Form f_exists(const std::vector<std::pair<VarId, Domain>> &vs, const Form &body) {
    Form f = body;
    for (auto it = vs.rbegin(); it != vs.rend(); ++it)
        f = f_exists(it->first, it->second, f);
    return f;
}

Form f_forall(const std::vector<std::pair<VarId, Domain>> &vs, const Form &body) {
    Form f = body;
    for (auto it = vs.rbegin(); it != vs.rend(); ++it)
        f = f_forall(it->first, it->second, f);
    return f;
}

// ---------------------------------------------------------------- queries

static void collect_free(const Form &f, std::set<VarId> &bound, std::set<VarId> &out) {
    using K = Formula::Kind;
    auto term = [&](const LinTerm &t) {
        for (auto &p : t.coeffs())
            if (!bound.count(p.first))
                out.insert(p.first);
    };
    switch (f->kind) {
    case K::True:
    case K::False:
        return;
    case K::Atom:
        term(f->lhs);
        term(f->rhs);
        return;
    case K::Div:
        term(f->term);
        return;
    case K::Not:
    case K::And:
    case K::Or:
        for (auto &k : f->kids)
            collect_free(k, bound, out);
        return;
    case K::Exists:
    case K::Forall: {
        bool was = bound.count(f->var) > 0;
        bound.insert(f->var);
        collect_free(f->kids[0], bound, out);
        if (!was)
            bound.erase(f->var);
        return;
    }
    }
}

std::set<VarId> free_vars(const Form &f) {
    std::set<VarId> bound, out;
    collect_free(f, bound, out);
    return out;
}

bool is_quantifier_free(const Form &f) {
    using K = Formula::Kind;
    if (f->kind == K::Exists || f->kind == K::Forall)
        return false;
    for (auto &k : f->kids)
        if (!is_quantifier_free(k))
            return false;
    return true;
}

bool evaluate(const Form &f, const Assignment &a) {
    using K = Formula::Kind;
    switch (f->kind) {
    case K::True:
        return true;
    case K::False:
        return false;
    case K::Atom: {
        Int l = f->lhs.eval(a), r = f->rhs.eval(a);
        switch (f->rel) {
        case Rel::Le: return l <= r;
        case Rel::Lt: return l < r;
        case Rel::Eq: return l == r;
        case Rel::Ne: return l != r;
        case Rel::Ge: return l >= r;
        case Rel::Gt: return l > r;
        }
        return false;
    }
    case K::Div: {
        Int v = f->term.eval(a);
        return mpz_divisible_p(v.get_mpz_t(), f->modulus.get_mpz_t()) != 0;
    }
    case K::Not:
        return !evaluate(f->kids[0], a);
    case K::And:
        for (auto &k : f->kids)
            if (!evaluate(k, a))
                return false;
        return true;
    case K::Or:
        for (auto &k : f->kids)
            if (evaluate(k, a))
                return true;
        return false;
    case K::Exists:
    case K::Forall:
        throw std::invalid_argument("evaluate: formula is not quantifier-free");
    }
    return false;
}

Form eliminate(const Form &f) {
    ++stats().qe_calls;
    return detail::to_form(detail::qe(f, false));
}

namespace {

// Strips a homogeneous quantifier prefix. Returns false when the sentence is not of that shape.
bool strip_prefix(const Form &f, Formula::Kind k, std::vector<std::pair<VarId, Domain>> &vs, Form &body) {
    Form cur = f;
    std::set<VarId> seen;
    while (cur->kind == k) {
        if (!seen.insert(cur->var).second)
            return false;
        vs.emplace_back(cur->var, cur->dom);
        cur = cur->kids[0];
    }
    if (!is_quantifier_free(cur))
        return false;
    body = cur;
    return true;
}

Form nat_guard(const std::vector<std::pair<VarId, Domain>> &vs) {
    std::vector<Form> g;
    for (auto &[v, d] : vs)
        if (d == Domain::Nat)
            g.push_back(f_atom(Rel::Ge, LinTerm::var(v), LinTerm(0)));
    return f_and(std::move(g));
}

} // namespace

bool decide(const Form &sentence) {
    auto fv = free_vars(sentence);
    if (!fv.empty())
        throw FreeVariableError("decide: free variable " + var_name(*fv.begin()));
    std::vector<std::pair<VarId, Domain>> vs;
    Form body;
    if (strip_prefix(sentence, Formula::Kind::Exists, vs, body))
        return satisfiable(f_and(nat_guard(vs), body));
    vs.clear();
    if (strip_prefix(sentence, Formula::Kind::Forall, vs, body))
        return !satisfiable(f_and(nat_guard(vs), f_not(body)));
    auto n = detail::qe(sentence, false);
    return detail::eval_node(n, {});
}

bool satisfiable(const Form &qf) {
    ++stats().sat_calls;
    if (!is_quantifier_free(qf)) {
        auto fv = free_vars(qf);
        std::vector<std::pair<VarId, Domain>> vs;
        for (auto v : fv)
            vs.emplace_back(v, Domain::Int);
        return detail::eval_node(detail::qe(f_exists(vs, qf), false), {});
    }
    return detail::node_sat(detail::qe(qf, false));
}

// ---------------------------------------------------------------- printing / parsing

std::string to_sexpr(const LinTerm &t) {
    std::vector<std::string> parts;
    for (auto &[v, c] : t.coeffs()) {
        if (c == 1)
            parts.push_back(var_name(v));
        else
            parts.push_back("(* " + c.get_str() + " " + var_name(v) + ")");
    }
    if (t.constant() != 0 || parts.empty())
        parts.push_back(t.constant().get_str());
    if (parts.size() == 1)
        return parts[0];
    std::string s = "(+";
    for (auto &p : parts)
        s += " " + p;
    return s + ")";
}

std::string to_sexpr(const Form &f) {
    using K = Formula::Kind;
    switch (f->kind) {
    case K::True:
        return "true";
    case K::False:
        return "false";
    case K::Atom: {
        static const char *names[] = {"leq", "lt", "eq", "neq", "geq", "gt"};
        return std::string("(") + names[static_cast<int>(f->rel)] + " " + to_sexpr(f->lhs) + " " +
               to_sexpr(f->rhs) + ")";
    }
    case K::Div:
        return "(div " + f->modulus.get_str() + " " + to_sexpr(f->term) + ")";
    case K::Not:
        return "(not " + to_sexpr(f->kids[0]) + ")";
    case K::And:
    case K::Or: {
        std::string s = f->kind == K::And ? "(and" : "(or";
        for (auto &k : f->kids)
            s += " " + to_sexpr(k);
        return s + ")";
    }
    case K::Exists:
    case K::Forall:
        return std::string(f->kind == K::Exists ? "(exists" : "(forall") + " ((" + var_name(f->var) +
               (f->dom == Domain::Nat ? " nat" : " int") + ")) " + to_sexpr(f->kids[0]) + ")";
    }
    return "?";
}

namespace {

LinTerm parse_term(const SExprP &e) {
    if (e->is_atom) {
        if (e->is_int())
            return LinTerm(Int(e->atom));
        return LinTerm::var(var_id(e->atom));
    }
    if (e->items.empty() || !e->items[0]->is_atom)
        throw ParseError(e->loc, "malformed term", {"+", "-", "*"});
    const std::string &op = e->items[0]->atom;
    if (op == "+") {
        LinTerm t;
        for (size_t i = 1; i < e->items.size(); ++i)
            t += parse_term(e->items[i]);
        return t;
    }
    if (op == "-") {
        if (e->items.size() == 2)
            return -parse_term(e->items[1]);
        if (e->items.size() != 3)
            throw ParseError(e->loc, "'-' takes one or two arguments");
        return parse_term(e->items[1]) - parse_term(e->items[2]);
    }
    if (op == "*") {
        if (e->items.size() != 3 || !e->items[1]->is_int())
            throw ParseError(e->loc, "'*' expects an integer literal and a term");
        return parse_term(e->items[2]) * Int(e->items[1]->atom);
    }
    throw ParseError(e->loc, "unknown term operator '" + op + "'", {"+", "-", "*"});
}

Form parse_form(const SExprP &e) {
    if (e->is_atom) {
        if (e->atom == "true")
            return f_true();
        if (e->atom == "false")
            return f_false();
        throw ParseError(e->loc, "expected a formula", {"true", "false", "("});
    }
    if (e->items.empty() || !e->items[0]->is_atom)
        throw ParseError(e->loc, "malformed formula");
    const std::string &op = e->items[0]->atom;
    auto args = [&](size_t n) {
        if (e->items.size() != n + 1)
            throw ParseError(e->loc, "'" + op + "' expects " + std::to_string(n) + " arguments");
    };
    static const std::map<std::string, Rel> rels = {{"leq", Rel::Le}, {"lt", Rel::Lt}, {"eq", Rel::Eq},
                                                    {"neq", Rel::Ne}, {"geq", Rel::Ge}, {"gt", Rel::Gt}};
    if (auto it = rels.find(op); it != rels.end()) {
        args(2);
        return f_atom(it->second, parse_term(e->items[1]), parse_term(e->items[2]));
    }
    if (op == "div") {
        args(2);
        if (!e->items[1]->is_int())
            throw ParseError(e->items[1]->loc, "divisor must be an integer literal");
        return f_div(Int(e->items[1]->atom), parse_term(e->items[2]));
    }
    if (op == "not") {
        args(1);
        return f_not(parse_form(e->items[1]));
    }
    if (op == "and" || op == "or") {
        std::vector<Form> ks;
        for (size_t i = 1; i < e->items.size(); ++i)
            ks.push_back(parse_form(e->items[i]));
        return op == "and" ? f_and(std::move(ks)) : f_or(std::move(ks));
    }
    if (op == "exists" || op == "forall") {
        args(2);
        auto &binders = e->items[1];
        if (binders->is_atom)
            throw ParseError(binders->loc, "expected binder list");
        std::vector<std::pair<VarId, Domain>> vs;
        for (auto &b : binders->items) {
            if (b->is_atom || b->items.size() != 2 || !b->items[0]->is_atom || !b->items[1]->is_atom)
                throw ParseError(b->loc, "expected (name int|nat)");
            const std::string &d = b->items[1]->atom;
            if (d != "int" && d != "nat")
                throw ParseError(b->items[1]->loc, "unknown domain '" + d + "'", {"int", "nat"});
            vs.emplace_back(var_id(b->items[0]->atom), d == "nat" ? Domain::Nat : Domain::Int);
        }
        Form body = parse_form(e->items[2]);
        return op == "exists" ? f_exists(vs, body) : f_forall(vs, body);
    }
    throw ParseError(e->loc, "unknown connective '" + op + "'",
                     {"and", "or", "not", "exists", "forall", "leq", "lt", "eq", "neq", "geq", "gt"});
}

} // namespace

Form parse_formula(const std::string &text) { return parse_form(read_sexpr(text)); }

// ---------------------------------------------------------------- internal nodes

namespace detail {

Int lcm(const Int &a, const Int &b) {
    Int r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

static Int gcd(const Int &a, const Int &b) {
    Int r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

static LinTerm div_exact(const LinTerm &t, const Int &g) {
    LinTerm r(Int(t.constant() / g));
    for (auto &[v, c] : t.coeffs())
        r += LinTerm::var(v, c / g);
    return r;
}

Tri normalize(Lit &l) {
    switch (l.k) {
    case Lit::Le: {
        if (l.t.is_constant())
            return l.t.constant() <= 0 ? Tri::True : Tri::False;
        Int g = l.t.content();
        if (g > 1) {
            Int c;
            mpz_cdiv_q(c.get_mpz_t(), l.t.constant().get_mpz_t(), g.get_mpz_t());
            LinTerm r(c);
            for (auto &[v, a] : l.t.coeffs())
                r += LinTerm::var(v, a / g);
            l.t = r;
        }
        return Tri::Open;
    }
    case Lit::Eq: {
        if (l.t.is_constant())
            return l.t.constant() == 0 ? Tri::True : Tri::False;
        Int g = l.t.content();
        if (g > 1) {
            if (!mpz_divisible_p(l.t.constant().get_mpz_t(), g.get_mpz_t()))
                return Tri::False;
            l.t = div_exact(l.t, g);
        }
        if (l.t.coeffs()[0].second < 0)
            l.t = -l.t;
        return Tri::Open;
    }
    case Lit::Dv:
    case Lit::Nd: {
        bool dv = l.k == Lit::Dv;
        l.m = abs(l.m);
        if (l.m == 0)
            throw std::logic_error("divisibility by zero");
        Int c;
        mpz_fdiv_r(c.get_mpz_t(), l.t.constant().get_mpz_t(), l.m.get_mpz_t());
        LinTerm r(c);
        for (auto &[v, a] : l.t.coeffs()) {
            Int b;
            mpz_fdiv_r(b.get_mpz_t(), a.get_mpz_t(), l.m.get_mpz_t());
            if (b != 0)
                r += LinTerm::var(v, b);
        }
        l.t = r;
        if (l.m == 1)
            return dv ? Tri::True : Tri::False;
        if (l.t.is_constant())
            return (l.t.constant() == 0) == dv ? Tri::True : Tri::False;
        Int h = gcd(l.m, l.t.content());
        if (h > 1) {
            if (!mpz_divisible_p(l.t.constant().get_mpz_t(), h.get_mpz_t()))
                return dv ? Tri::False : Tri::True;
            l.t = div_exact(l.t, h);
            l.m /= h;
            if (l.m == 1)
                return dv ? Tri::True : Tri::False;
        }
        return Tri::Open;
    }
    }
    return Tri::Open;
}

std::vector<Lit> negate_lit(const Lit &l, Tri &constant) {
    std::vector<Lit> out;
    constant = Tri::Open;
    auto push = [&](Lit x) {
        Tri t = normalize(x);
        if (t == Tri::True)
            constant = Tri::True;
        else if (t == Tri::Open)
            out.push_back(std::move(x));
    };
    switch (l.k) {
    case Lit::Le:
        push(Lit{Lit::Le, 0, -l.t + LinTerm(1)});
        break;
    case Lit::Eq:
        push(Lit{Lit::Le, 0, l.t + LinTerm(1)});
        push(Lit{Lit::Le, 0, -l.t + LinTerm(1)});
        break;
    case Lit::Dv:
        push(Lit{Lit::Nd, l.m, l.t});
        break;
    case Lit::Nd:
        push(Lit{Lit::Dv, l.m, l.t});
        break;
    }
    if (constant == Tri::Open && out.empty())
        constant = Tri::False;
    return out;
}

bool eval_lit(const Lit &l, const Assignment &a) {
    Int v = l.t.eval(a);
    switch (l.k) {
    case Lit::Le: return v <= 0;
    case Lit::Eq: return v == 0;
    case Lit::Dv: return mpz_divisible_p(v.get_mpz_t(), l.m.get_mpz_t()) != 0;
    case Lit::Nd: return mpz_divisible_p(v.get_mpz_t(), l.m.get_mpz_t()) == 0;
    }
    return false;
}

NodeP n_true() {
    static NodeP t = std::make_shared<const Node>(Node{Node::T, {}, {}});
    return t;
}

NodeP n_false() {
    static NodeP f = std::make_shared<const Node>(Node{Node::F, {}, {}});
    return f;
}

NodeP n_lit(Lit l) {
    Tri t = normalize(l);
    if (t == Tri::True)
        return n_true();
    if (t == Tri::False)
        return n_false();
    return std::make_shared<const Node>(Node{Node::L, std::move(l), {}});
}

static NodeP junction(Node::K k, std::vector<NodeP> kids) {
    bool is_and = k == Node::And;
    std::vector<NodeP> out;
    out.reserve(kids.size());
    auto add = [&](const NodeP &n) {
        if (n->k == Node::L)
            for (auto &o : out)
                if (o->k == Node::L && o->lit == n->lit)
                    return;
        out.push_back(n);
    };
    for (auto &n : kids) {
        if (n->k == (is_and ? Node::T : Node::F))
            continue;
        if (n->k == (is_and ? Node::F : Node::T))
            return is_and ? n_false() : n_true();
        if (n->k == k) {
            for (auto &c : n->kids)
                add(c);
        } else {
            add(n);
        }
    }
    if (out.empty())
        return is_and ? n_true() : n_false();
    if (out.size() == 1)
        return out[0];
    return std::make_shared<const Node>(Node{k, {}, std::move(out)});
}

NodeP n_and(std::vector<NodeP> kids) { return junction(Node::And, std::move(kids)); }
NodeP n_or(std::vector<NodeP> kids) { return junction(Node::Or, std::move(kids)); }

NodeP n_negate(const NodeP &n) {
    switch (n->k) {
    case Node::T:
        return n_false();
    case Node::F:
        return n_true();
    case Node::L: {
        Tri c;
        auto lits = negate_lit(n->lit, c);
        if (c == Tri::True)
            return n_true();
        if (c == Tri::False)
            return n_false();
        std::vector<NodeP> ks;
        for (auto &l : lits)
            ks.push_back(n_lit(l));
        return n_or(std::move(ks));
    }
    case Node::And:
    case Node::Or: {
        std::vector<NodeP> ks;
        for (auto &c : n->kids)
            ks.push_back(n_negate(c));
        return n->k == Node::And ? n_or(std::move(ks)) : n_and(std::move(ks));
    }
    }
    return n;
}

bool mentions(const NodeP &n, VarId x) {
    if (n->k == Node::L)
        return n->lit.t.has(x);
    for (auto &c : n->kids)
        if (mentions(c, x))
            return true;
    return false;
}

bool eval_node(const NodeP &n, const Assignment &a) {
    switch (n->k) {
    case Node::T: return true;
    case Node::F: return false;
    case Node::L: return eval_lit(n->lit, a);
    case Node::And:
        for (auto &c : n->kids)
            if (!eval_node(c, a))
                return false;
        return true;
    case Node::Or:
        for (auto &c : n->kids)
            if (eval_node(c, a))
                return true;
        return false;
    }
    return false;
}

NodeP qe(const Form &f, bool neg) {
    using K = Formula::Kind;
    switch (f->kind) {
    case K::True:
        return neg ? n_false() : n_true();
    case K::False:
        return neg ? n_true() : n_false();
    case K::Atom: {
        LinTerm t = f->lhs - f->rhs;
        NodeP n;
        switch (f->rel) {
        case Rel::Le: n = n_lit({Lit::Le, 0, t}); break;
        case Rel::Lt: n = n_lit({Lit::Le, 0, t + LinTerm(1)}); break;
        case Rel::Ge: n = n_lit({Lit::Le, 0, -t}); break;
        case Rel::Gt: n = n_lit({Lit::Le, 0, -t + LinTerm(1)}); break;
        case Rel::Eq: n = n_lit({Lit::Eq, 0, t}); break;
        case Rel::Ne: n = n_negate(n_lit({Lit::Eq, 0, t})); break;
        }
        return neg ? n_negate(n) : n;
    }
    case K::Div:
        return n_lit({neg ? Lit::Nd : Lit::Dv, f->modulus, f->term});
    case K::Not:
        return qe(f->kids[0], !neg);
    case K::And:
    case K::Or: {
        std::vector<NodeP> ks;
        for (auto &k : f->kids)
            ks.push_back(qe(k, neg));
        bool conj = (f->kind == K::And) != neg;
        return conj ? n_and(std::move(ks)) : n_or(std::move(ks));
    }
    case K::Exists:
    case K::Forall: {
        // exists x. phi  /  forall x. phi == not exists x. not phi
        bool inner_neg = f->kind == K::Forall;
        NodeP body = qe(f->kids[0], inner_neg);
        if (f->dom == Domain::Nat)
            body = n_and({n_lit({Lit::Le, 0, -LinTerm::var(f->var)}), body});
        NodeP ex = exists_elim(f->var, body);
        bool negate_result = inner_neg != neg;
        return negate_result ? n_negate(ex) : ex;
    }
    }
    return n_true();
}

Form to_form(const NodeP &n) {
    switch (n->k) {
    case Node::T:
        return f_true();
    case Node::F:
        return f_false();
    case Node::L:
        switch (n->lit.k) {
        case Lit::Le: return f_atom(Rel::Le, n->lit.t, LinTerm(0));
        case Lit::Eq: return f_atom(Rel::Eq, n->lit.t, LinTerm(0));
        case Lit::Dv: return f_div(n->lit.m, n->lit.t);
        case Lit::Nd: return f_not(f_div(n->lit.m, n->lit.t));
        }
        return f_true();
    case Node::And:
    case Node::Or: {
        std::vector<Form> ks;
        for (auto &c : n->kids)
            ks.push_back(to_form(c));
        return n->k == Node::And ? f_and(std::move(ks)) : f_or(std::move(ks));
    }
    }
    return f_true();
}

// ---------------------------------------------------------------- Cooper

namespace {

size_t dnf_size(const NodeP &n, size_t cap) {
    switch (n->k) {
    case Node::Or: {
        size_t s = 0;
        for (auto &c : n->kids) {
            s += dnf_size(c, cap);
            if (s > cap)
                return cap + 1;
        }
        return s;
    }
    case Node::And: {
        size_t s = 1;
        for (auto &c : n->kids) {
            s *= dnf_size(c, cap);
            if (s > cap)
                return cap + 1;
        }
        return s;
    }
    default:
        return 1;
    }
}

void to_dnf(const NodeP &n, std::vector<std::vector<Lit>> &out) {
    switch (n->k) {
    case Node::T:
        out.push_back({});
        return;
    case Node::F:
        return;
    case Node::L:
        out.push_back({n->lit});
        return;
    case Node::Or:
        for (auto &c : n->kids)
            to_dnf(c, out);
        return;
    case Node::And: {
        std::vector<std::vector<Lit>> acc{{}};
        for (auto &c : n->kids) {
            std::vector<std::vector<Lit>> part, next;
            to_dnf(c, part);
            for (auto &a : acc)
                for (auto &p : part) {
                    auto v = a;
                    v.insert(v.end(), p.begin(), p.end());
                    next.push_back(std::move(v));
                }
            acc = std::move(next);
            if (acc.empty())
                return;
        }
        out.insert(out.end(), acc.begin(), acc.end());
        return;
    }
    }
}

NodeP conj_node(const std::vector<Lit> &ls) {
    std::vector<NodeP> ks;
    for (auto &l : ls)
        ks.push_back(n_lit(l));
    return n_and(std::move(ks));
}

template <class F>
NodeP map_lits(const NodeP &n, F &&f) {
    switch (n->k) {
    case Node::T:
    case Node::F:
        return n;
    case Node::L:
        return f(n->lit);
    case Node::And:
    case Node::Or: {
        std::vector<NodeP> ks;
        ks.reserve(n->kids.size());
        for (auto &c : n->kids)
            ks.push_back(map_lits(c, f));
        return n->k == Node::And ? n_and(std::move(ks)) : n_or(std::move(ks));
    }
    }
    return n;
}

void collect_lits(const NodeP &n, VarId x, std::vector<Lit> &out) {
    if (n->k == Node::L) {
        if (n->lit.t.has(x))
            out.push_back(n->lit);
        return;
    }
    for (auto &c : n->kids)
        collect_lits(c, x, out);
}

NodeP cooper_general(VarId x, const NodeP &phi) {
    std::vector<Lit> xs;
    collect_lits(phi, x, xs);
    Int l = 1;
    for (auto &lit : xs)
        l = lcm(l, abs(lit.t.coeff(x)));
    // scale so every x coefficient is +-l, then read l*x as x
    NodeP scaled = map_lits(phi, [&](const Lit &lit) -> NodeP {
        Int a = lit.t.coeff(x);
        if (a == 0)
            return n_lit(lit);
        Int k = l / abs(a);
        Lit r = lit;
        r.t = lit.t.without(x) * k + LinTerm::var(x, sgn(a));
        if (lit.k == Lit::Dv || lit.k == Lit::Nd)
            r.m = lit.m * k;
        return n_lit(r);
    });
    if (l > 1)
        scaled = n_and({scaled, n_lit({Lit::Dv, l, LinTerm::var(x)})});

    std::vector<Lit> ys;
    collect_lits(scaled, x, ys);
    std::vector<LinTerm> lower, upper;
    Int D = 1;
    for (auto &lit : ys) {
        Int a = lit.t.coeff(x);
        LinTerm s = lit.t.without(x);
        switch (lit.k) {
        case Lit::Le:
            if (a > 0)
                upper.push_back(-s + LinTerm(1)); // x <= -s  ->  x < -s+1
            else
                lower.push_back(s - LinTerm(1)); // x >= s  ->  x > s-1
            break;
        case Lit::Eq: {
            LinTerm v = a > 0 ? -s : s; // x = v
            lower.push_back(v - LinTerm(1));
            upper.push_back(v + LinTerm(1));
            break;
        }
        case Lit::Dv:
        case Lit::Nd:
            D = lcm(D, lit.m);
            break;
        }
    }
    auto dedup = [](std::vector<LinTerm> &v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedup(lower);
    dedup(upper);
    bool use_lower = lower.size() <= upper.size();
    auto &bounds = use_lower ? lower : upper;

    NodeP inf = map_lits(scaled, [&](const Lit &lit) -> NodeP {
        Int a = lit.t.coeff(x);
        if (a == 0)
            return n_lit(lit);
        switch (lit.k) {
        case Lit::Le:
            return (a > 0) == use_lower ? n_true() : n_false();
        case Lit::Eq:
            return n_false();
        default:
            return n_lit(lit);
        }
    });
    auto subst = [&](const NodeP &n, const LinTerm &v) {
        return map_lits(n, [&](const Lit &lit) -> NodeP {
            if (!lit.t.has(x))
                return n_lit(lit);
            Lit r = lit;
            r.t = lit.t.substitute(x, v);
            return n_lit(r);
        });
    };
    std::vector<NodeP> out;
    long dmax = D.get_si();
    if (D > 1000000)
        throw std::runtime_error("presburger: divisibility period too large");
    for (long j = 1; j <= dmax; ++j) {
        LinTerm jj(use_lower ? j : -j);
        if (mentions(inf, x))
            out.push_back(subst(inf, jj));
        else if (j == 1)
            out.push_back(inf);
        for (auto &b : bounds)
            out.push_back(subst(scaled, b + jj));
        if (out.size() && out.back()->k == Node::T)
            return n_true();
    }
    return n_or(std::move(out));
}

} // namespace

NodeP exists_elim(VarId x, const NodeP &phi) {
    if (!mentions(phi, x))
        return phi;
    if (phi->k == Node::Or) {
        std::vector<NodeP> ks;
        for (auto &c : phi->kids) {
            ks.push_back(exists_elim(x, c));
            if (ks.back()->k == Node::T)
                return n_true();
        }
        return n_or(std::move(ks));
    }
    if (phi->k == Node::And) {
        // pull out conjuncts that do not mention x
        std::vector<NodeP> keep, with;
        for (auto &c : phi->kids)
            (mentions(c, x) ? with : keep).push_back(c);
        if (!keep.empty()) {
            keep.push_back(exists_elim(x, n_and(with)));
            return n_and(std::move(keep));
        }
    }
    if (dnf_size(phi, 64) <= 64) {
        std::vector<std::vector<Lit>> dnf;
        to_dnf(phi, dnf);
        std::vector<NodeP> ks;
        for (auto &conj : dnf) {
            for (auto &c : project_conj(conj, x)) {
                ks.push_back(conj_node(c));
                if (ks.back()->k == Node::T)
                    return n_true();
            }
        }
        return n_or(std::move(ks));
    }
    return cooper_general(x, phi);
}

} // namespace detail

} // namespace lchc::pres
