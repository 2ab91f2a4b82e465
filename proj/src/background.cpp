#include "lchc/background.hpp"
#include "lchc/typesys.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>

namespace lchc {

using namespace pres;

namespace {

bool is_omega(const Int &v) { return v < 0; }

// a <= b with omega as top
bool comp_leq(const Int &a, const Int &b) {
    if (is_omega(b))
        return true;
    if (is_omega(a))
        return false;
    return a <= b;
}

bool elem_leq(const WElem &a, const WElem &b) {
    for (size_t i = 0; i < a.size(); ++i)
        if (!comp_leq(a[i], b[i]))
            return false;
    return true;
}

// Satisfiability with every free variable read existentially.
bool exsat(const Form &f) {
    auto fv = free_vars(f);
    if (fv.empty())
        return decide(f);
    std::vector<std::pair<VarId, Domain>> vs;
    for (auto v : fv)
        vs.push_back({v, Domain::Int});
    return decide(f_exists(vs, f));
}

// forall K exists (free vars). f(K)
bool unbounded(const Form &f, VarId k) {
    auto fv = free_vars(f);
    fv.erase(k);
    std::vector<std::pair<VarId, Domain>> vs;
    for (auto v : fv)
        vs.push_back({v, Domain::Int});
    Form inner = vs.empty() ? f : f_exists(vs, f);
    return decide(f_forall(k, Domain::Int, inner));
}

// Least c with pred(c), given pred monotone (false below, true above) and
// pred(start) true.
Int least_true(const std::function<bool(const Int &)> &pred, Int hi, const Int &floor_or_none, bool has_floor) {
    Int lo; // pred(lo) false
    Int step = 1;
    for (;;) {
        Int cand = hi - step;
        if (has_floor && cand < floor_or_none) {
            cand = floor_or_none - 1;
            lo = cand;
            break;
        }
        if (!pred(cand)) {
            lo = cand;
            break;
        }
        hi = cand;
        step *= 2;
    }
    while (hi - lo > 1) {
        Int mid = lo + (hi - lo) / 2;
        if (pred(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

// Smallest value of the component x over the set of f, assuming f is
// satisfiable and x bounded below on it.
Int minimize(const Form &f, VarId x, const Int &floor, bool has_floor) {
    auto pred = [&](const Int &c) { return exsat(f_and(f, f_atom(Rel::Le, LinTerm::var(x), LinTerm(c)))); };
    Int hi = has_floor ? floor : Int(0);
    Int step = 1;
    while (!pred(hi)) {
        hi += step;
        step *= 2;
    }
    return least_true(pred, hi, floor, has_floor);
}

} // namespace

bool Upset::operator<(const Upset &o) const {
    if (k != o.k)
        return k < o.k;
    if (bound != o.bound)
        return bound < o.bound;
    return elems < o.elems;
}

TheoryHandle::TheoryHandle(Theory t, int dim, Direction dir) : theory_(t), dim_(dim), dir_(dir) {
    if (dim < 1)
        throw DimensionMismatch("dimension must be positive");
    if (t == Theory::LIA && dim != 1)
        throw DimensionMismatch("the integer theory has dimension 1");
}

bool TheoryHandle::w_leq(const WElem &a, const WElem &b) const {
    if (a.size() != static_cast<size_t>(dim_) || b.size() != static_cast<size_t>(dim_))
        throw DimensionMismatch("element of wrong dimension");
    for (int i = 0; i < dim_; ++i)
        if (a[i] > b[i])
            return false;
    return true;
}

Upset TheoryHandle::all() const {
    Upset u;
    u.k = Upset::K::All;
    return u;
}

bool TheoryHandle::dominated(const WElem &a, const WElem &b) const {
    return down() ? elem_leq(a, b) : elem_leq(b, a);
}

Upset TheoryHandle::canonicalize(Upset u) const {
    if (u.k != Upset::K::Antichain) {
        if (u.k != Upset::K::Bound)
            u.bound = 0;
        u.elems.clear();
        return u;
    }
    if (nat() == false)
        throw SchemaError("antichain descriptor over the integers");
    for (auto &e : u.elems) {
        if (e.size() != static_cast<size_t>(dim_))
            throw DimensionMismatch("antichain element of wrong dimension");
        for (auto &c : e)
            if (is_omega(c)) {
                if (!down())
                    throw SchemaError("unbounded component in an upward antichain");
                c = omega();
            }
    }
    std::sort(u.elems.begin(), u.elems.end());
    u.elems.erase(std::unique(u.elems.begin(), u.elems.end()), u.elems.end());
    std::vector<WElem> keep;
    for (size_t i = 0; i < u.elems.size(); ++i) {
        bool drop = false;
        for (size_t j = 0; j < u.elems.size() && !drop; ++j)
            if (i != j && dominated(u.elems[i], u.elems[j]))
                drop = true;
        if (!drop)
            keep.push_back(u.elems[i]);
    }
    u.elems = std::move(keep);
    u.bound = 0;
    if (u.elems.empty())
        return empty();
    WElem top(dim_, down() ? omega() : Int(0));
    if (u.elems.size() == 1 && u.elems[0] == top)
        return all();
    return u;
}

Upset TheoryHandle::principal(const WElem &w) const {
    if (w.size() != static_cast<size_t>(dim_))
        throw DimensionMismatch("element of wrong dimension");
    Upset u;
    if (!nat()) {
        u.k = Upset::K::Bound;
        u.bound = w[0];
        return u;
    }
    u.k = Upset::K::Antichain;
    u.elems = {w};
    return canonicalize(u);
}

bool TheoryHandle::member(const WElem &w, const Upset &u) const {
    if (w.size() != static_cast<size_t>(dim_))
        throw DimensionMismatch("element of wrong dimension");
    switch (u.k) {
    case Upset::K::Empty: return false;
    case Upset::K::All: return true;
    case Upset::K::Bound: return down() ? w[0] <= u.bound : w[0] >= u.bound;
    case Upset::K::Antichain:
        for (auto &m : u.elems)
            if (down() ? elem_leq(w, m) : elem_leq(m, w))
                return true;
        return false;
    }
    return false;
}

Form TheoryHandle::to_formula(const Upset &u, const std::vector<LinTerm> &w) const {
    if (w.size() != static_cast<size_t>(dim_))
        throw DimensionMismatch("element of wrong dimension");
    switch (u.k) {
    case Upset::K::Empty: return f_false();
    case Upset::K::All: return f_true();
    case Upset::K::Bound:
        return down() ? f_atom(Rel::Le, w[0], LinTerm(u.bound)) : f_atom(Rel::Ge, w[0], LinTerm(u.bound));
    case Upset::K::Antichain: {
        std::vector<Form> ds;
        for (auto &m : u.elems) {
            std::vector<Form> cs;
            for (int i = 0; i < dim_; ++i) {
                if (is_omega(m[i]))
                    continue;
                cs.push_back(down() ? f_atom(Rel::Le, w[i], LinTerm(m[i])) : f_atom(Rel::Ge, w[i], LinTerm(m[i])));
            }
            ds.push_back(f_and(std::move(cs)));
        }
        return f_or(std::move(ds));
    }
    }
    return f_false();
}

Upset TheoryHandle::join(const Upset &a, const Upset &b) const {
    if (a.k == Upset::K::Empty)
        return b;
    if (b.k == Upset::K::Empty)
        return a;
    if (a.k == Upset::K::All || b.k == Upset::K::All)
        return all();
    if (!nat()) {
        Upset u = a;
        u.bound = down() ? std::max(a.bound, b.bound) : std::min(a.bound, b.bound);
        return u;
    }
    Upset u = a;
    u.elems.insert(u.elems.end(), b.elems.begin(), b.elems.end());
    return canonicalize(u);
}

bool TheoryHandle::subset(const Upset &a, const Upset &b) const {
    if (a.k == Upset::K::Empty || b.k == Upset::K::All)
        return true;
    if (b.k == Upset::K::Empty || a.k == Upset::K::All)
        return false;
    if (!nat())
        return down() ? a.bound <= b.bound : a.bound >= b.bound;
    for (auto &m : a.elems) {
        bool in = false;
        for (auto &n : b.elems)
            if (dominated(m, n))
                in = true;
        if (!in)
            return false;
    }
    return true;
}

namespace {

struct NatCache {
    std::mutex mu;
    std::vector<Upset> list;
    std::set<Upset> seen;
    size_t next_level = 0;
};

NatCache &nat_cache(int dim, bool down) {
    static std::mutex mu;
    static std::map<std::pair<int, bool>, std::unique_ptr<NatCache>> caches;
    std::lock_guard<std::mutex> g(mu);
    auto &c = caches[{dim, down}];
    if (!c)
        c = std::make_unique<NatCache>();
    return *c;
}

size_t nat_level(const Upset &u) {
    if (u.k == Upset::K::Empty)
        return 0;
    if (u.k == Upset::K::All)
        return 1;
    size_t lv = u.elems.size();
    for (auto &e : u.elems)
        for (auto &c : e)
            if (!is_omega(c))
                lv = std::max(lv, static_cast<size_t>(c.get_ui()) + 1);
    return lv;
}

} // namespace

size_t TheoryHandle::level(const Upset &u) const {
    if (nat())
        return nat_level(u);
    switch (u.k) {
    case Upset::K::Empty: return 0;
    case Upset::K::All: return 1;
    default: {
        Int k = u.bound;
        Int j = k > 0 ? Int(2 * k - 1) : Int(-2 * k);
        return j.get_ui() + 2;
    }
    }
}

Upset TheoryHandle::enumerate(size_t i) const {
    if (!nat()) {
        if (i == 0)
            return empty();
        if (i == 1)
            return all();
        size_t j = i - 2;
        Upset u;
        u.k = Upset::K::Bound;
        u.bound = (j % 2 == 1) ? Int(static_cast<unsigned long>((j + 1) / 2)) : -Int(static_cast<unsigned long>(j / 2));
        return u;
    }
    NatCache &c = nat_cache(dim_, down());
    std::lock_guard<std::mutex> g(c.mu);
    while (c.list.size() <= i) {
        size_t L = c.next_level++;
        std::vector<Upset> found;
        if (L == 0) {
            found.push_back(empty());
        } else {
            // all points with finite components below L (plus omega downward)
            std::vector<WElem> pts;
            WElem cur(dim_);
            std::vector<Int> vals;
            for (size_t v = 0; v < L; ++v)
                vals.push_back(Int(static_cast<unsigned long>(v)));
            if (down())
                vals.push_back(omega());
            std::function<void(int)> gen = [&](int k) {
                if (k == dim_) {
                    pts.push_back(cur);
                    return;
                }
                for (auto &v : vals) {
                    cur[k] = v;
                    gen(k + 1);
                }
            };
            gen(0);
            std::sort(pts.begin(), pts.end());
            std::vector<WElem> chosen;
            std::function<void(size_t)> pick = [&](size_t from) {
                if (!chosen.empty()) {
                    Upset u;
                    u.k = Upset::K::Antichain;
                    u.elems = chosen;
                    u = canonicalize(u);
                    if (nat_level(u) == L && !c.seen.count(u))
                        found.push_back(u);
                }
                if (chosen.size() == L)
                    return;
                for (size_t p = from; p < pts.size(); ++p) {
                    bool ok = true;
                    for (auto &q : chosen)
                        if (elem_leq(q, pts[p]) || elem_leq(pts[p], q))
                            ok = false;
                    if (!ok)
                        continue;
                    chosen.push_back(pts[p]);
                    pick(p + 1);
                    chosen.pop_back();
                }
            };
            pick(0);
        }
        auto key = [](const Upset &u) {
            Int mx = -1;
            for (auto &e : u.elems)
                for (auto &x : e)
                    mx = std::max(mx, x);
            return std::make_tuple(u.elems.size(), mx, u.elems);
        };
        std::sort(found.begin(), found.end(), [&](const Upset &a, const Upset &b) { return key(a) < key(b); });
        for (auto &u : found)
            if (c.seen.insert(u).second)
                c.list.push_back(u);
    }
    return c.list[i];
}

Upset TheoryHandle::closure_of(const Form &phi0, const std::vector<VarId> &comps) const {
    if (comps.size() != static_cast<size_t>(dim_))
        throw DimensionMismatch("closure over the wrong number of components");
    std::vector<LinTerm> w;
    for (auto v : comps)
        w.push_back(LinTerm::var(v));
    Form phi = f_and(phi0, domain(w));
    if (!exsat(phi))
        return empty();
    if (!nat()) {
        VarId x = comps[0];
        // flip so that we always search for a least element
        Form f = phi;
        VarId y = x;
        if (down()) {
            y = fresh_var("neg");
            f = f_and(phi, f_atom(Rel::Eq, LinTerm::var(y), -LinTerm::var(x)));
        }
        VarId k = fresh_var("K");
        Form below = f_and(f, f_atom(Rel::Le, LinTerm::var(y), LinTerm::var(k)));
        // cheap probes before the exact unboundedness test
        if (exsat(f_and(f, f_atom(Rel::Le, LinTerm::var(y), LinTerm(Int(-(1L << 20)))))) && unbounded(below, k))
            return all();
        Int m = minimize(f, y, 0, false);
        Upset u;
        u.k = Upset::K::Bound;
        u.bound = down() ? Int(-m) : m;
        return u;
    }
    Upset u;
    u.k = Upset::K::Antichain;
    for (int guard = 0;; ++guard) {
        if (guard > 4096)
            throw std::runtime_error("closure did not converge");
        Upset cu = canonicalize(u);
        Form rest = f_and(phi, f_not(to_formula(cu, w)));
        if (!exsat(rest))
            return cu;
        // lexicographically least point of the remainder
        WElem p(dim_);
        Form fixed = rest;
        for (int i = 0; i < dim_; ++i) {
            p[i] = minimize(fixed, comps[i], 0, true);
            fixed = f_and(fixed, f_atom(Rel::Eq, w[i], LinTerm(p[i])));
        }
        if (!down()) {
            u.elems.push_back(p);
            continue;
        }
        // grow p into a maximal generator inside the downward closure
        VarId k = fresh_var("K");
        auto feasible = [&](const WElem &g) {
            std::vector<Form> cs{phi};
            bool any_omega = false;
            for (int j = 0; j < dim_; ++j) {
                if (is_omega(g[j])) {
                    any_omega = true;
                    cs.push_back(f_atom(Rel::Ge, w[j], LinTerm::var(k)));
                } else {
                    cs.push_back(f_atom(Rel::Ge, w[j], LinTerm(g[j])));
                }
            }
            Form f = f_and(std::move(cs));
            return any_omega ? unbounded(f, k) : exsat(f);
        };
        WElem g = p;
        for (int i = 0; i < dim_; ++i) {
            WElem t = g;
            t[i] = omega();
            if (feasible(t)) {
                g = t;
                continue;
            }
            Int lo = g[i], step = 1;
            Int hi;
            for (;;) {
                t[i] = lo + step;
                if (!feasible(t)) {
                    hi = lo + step;
                    break;
                }
                lo += step;
                step *= 2;
            }
            while (hi - lo > 1) {
                Int mid = lo + (hi - lo) / 2;
                t[i] = mid;
                if (feasible(t))
                    lo = mid;
                else
                    hi = mid;
            }
            g[i] = lo;
        }
        u.elems.push_back(g);
    }
}

nlohmann::json TheoryHandle::to_json(const Upset &u) const {
    using nlohmann::json;
    switch (u.k) {
    case Upset::K::Empty: return {{"kind", "empty"}};
    case Upset::K::All: return {{"kind", "all"}};
    case Upset::K::Bound: return {{"kind", down() ? "atmost" : "atleast"}, {"k", json::parse(u.bound.get_str())}};
    case Upset::K::Antichain: {
        json arr = json::array();
        for (auto &e : u.elems) {
            json t = json::array();
            for (auto &c : e)
                t.push_back(is_omega(c) ? json("inf") : json::parse(c.get_str()));
            arr.push_back(t);
        }
        return {{"kind", "antichain"}, {down() ? "max" : "min", arr}};
    }
    }
    return {};
}

Upset TheoryHandle::from_json(const nlohmann::json &j) const {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw SchemaError("upset descriptor without a kind");
    std::string k = j["kind"];
    auto num = [](const nlohmann::json &v) {
        if (!v.is_number_integer())
            throw SchemaError("expected an integer in an upset descriptor");
        return Int(v.dump());
    };
    Upset u;
    if (k == "empty")
        return empty();
    if (k == "all")
        return all();
    if (k == "atleast" || k == "atmost") {
        if (nat())
            throw SchemaError("threshold descriptor over tuples");
        if ((k == "atmost") != down())
            throw SchemaError("threshold descriptor of the wrong direction");
        if (!j.contains("k"))
            throw SchemaError("threshold descriptor without k");
        u.k = Upset::K::Bound;
        u.bound = num(j["k"]);
        return u;
    }
    if (k == "antichain") {
        const char *key = down() ? "max" : "min";
        if (!j.contains(key) || !j[key].is_array())
            throw SchemaError(std::string("antichain descriptor without ") + key);
        u.k = Upset::K::Antichain;
        for (auto &t : j[key]) {
            if (!t.is_array() || t.size() != static_cast<size_t>(dim_))
                throw DimensionMismatch("antichain element of wrong dimension");
            WElem e;
            for (auto &c : t) {
                if (c.is_string() && c.get<std::string>() == "inf" && down()) {
                    e.push_back(omega());
                    continue;
                }
                Int v = num(c);
                if (v < 0)
                    throw SchemaError("negative component in an antichain");
                e.push_back(v);
            }
            u.elems.push_back(e);
        }
        return canonicalize(u);
    }
    throw SchemaError("unknown upset kind '" + k + "'");
}

std::string TheoryHandle::str(const Upset &u) const {
    switch (u.k) {
    case Upset::K::Empty: return "Empty";
    case Upset::K::All: return "All";
    case Upset::K::Bound: return std::string(down() ? "AtMost(" : "AtLeast(") + u.bound.get_str() + ")";
    case Upset::K::Antichain: {
        std::ostringstream o;
        o << "{";
        for (size_t i = 0; i < u.elems.size(); ++i) {
            o << (i ? "," : "") << "(";
            for (size_t j = 0; j < u.elems[i].size(); ++j)
                o << (j ? "," : "") << (is_omega(u.elems[i][j]) ? std::string("w") : u.elems[i][j].get_str());
            o << ")";
        }
        o << "}";
        return o.str();
    }
    }
    return "?";
}

std::vector<LinTerm> TheoryHandle::constant(const WElem &w) const {
    std::vector<LinTerm> r;
    for (auto &c : w)
        r.push_back(LinTerm(c));
    return r;
}

Form TheoryHandle::domain(const std::vector<LinTerm> &w) const {
    if (!nat())
        return f_true();
    std::vector<Form> cs;
    for (auto &c : w)
        cs.push_back(f_atom(Rel::Ge, c, LinTerm(0)));
    return f_and(std::move(cs));
}

// ---------------------------------------------------------------- atoms

std::vector<LinTerm> fresh_components(const std::string &hint, int dim, std::vector<VarId> *ids) {
    std::vector<LinTerm> r;
    for (int i = 0; i < dim; ++i) {
        VarId v = fresh_var(dim == 1 ? hint : hint + "." + std::to_string(i + 1));
        if (ids)
            ids->push_back(v);
        r.push_back(LinTerm::var(v));
    }
    return r;
}

std::vector<LinTerm> compile_term(const TermP &t, const WEnv &env, const TheoryHandle &th) {
    auto bin = [&](const std::vector<LinTerm> &a, const std::vector<LinTerm> &b, bool sub) {
        if (a.size() != b.size())
            throw IllSortedAtom("arithmetic on terms of different sorts: " + term_str(t));
        std::vector<LinTerm> r;
        for (size_t i = 0; i < a.size(); ++i)
            r.push_back(sub ? a[i] - b[i] : a[i] + b[i]);
        return r;
    };
    switch (t->k) {
    case Term::K::Var: {
        auto it = env.find(t->name);
        if (it == env.end())
            throw IllSortedAtom("no numeric binding for " + t->name);
        return it->second;
    }
    case Term::K::WLit: {
        std::vector<LinTerm> r;
        for (auto &c : t->tuple)
            r.push_back(LinTerm(c));
        if (t->is_tuple && r.size() != static_cast<size_t>(th.dim()))
            throw DimensionMismatch("tuple literal of the wrong dimension: " + term_str(t));
        return r;
    }
    case Term::K::Add: return bin(compile_term(t->a, env, th), compile_term(t->b, env, th), false);
    case Term::K::Sub: return bin(compile_term(t->a, env, th), compile_term(t->b, env, th), true);
    case Term::K::Neg: {
        auto r = compile_term(t->a, env, th);
        for (auto &x : r)
            x = -x;
        return r;
    }
    case Term::K::Scale: {
        auto r = compile_term(t->a, env, th);
        for (auto &x : r)
            x = x * t->factor;
        return r;
    }
    case Term::K::Comp: {
        auto r = compile_term(t->a, env, th);
        if (t->comp < 1 || static_cast<size_t>(t->comp) > r.size())
            throw IllSortedAtom("component index out of range: " + term_str(t));
        return {r[t->comp - 1]};
    }
    default: throw IllSortedAtom("not a numeric term: " + term_str(t));
    }
}

Form compile_atom(const Atom &a, const WEnv &env, const TheoryHandle &th) {
    if (a.k != Atom::K::Bg)
        throw IllSortedAtom("not a background atom: " + atom_str(a));
    auto l = compile_term(a.lhs, env, th), r = compile_term(a.rhs, env, th);
    if (l.size() != r.size())
        throw IllSortedAtom("comparison of terms of different sorts: " + atom_str(a));
    auto each = [&](Rel rel) {
        std::vector<Form> cs;
        for (size_t i = 0; i < l.size(); ++i)
            cs.push_back(f_atom(rel, l[i], r[i]));
        return cs;
    };
    auto le = [&](bool flip) {
        std::vector<Form> cs;
        for (size_t i = 0; i < l.size(); ++i)
            cs.push_back(flip ? f_atom(Rel::Le, r[i], l[i]) : f_atom(Rel::Le, l[i], r[i]));
        return f_and(std::move(cs));
    };
    auto ne = [&] { return f_or(each(Rel::Ne)); };
    switch (a.rel) {
    case Rel::Le: return le(false);
    case Rel::Ge: return le(true);
    case Rel::Eq: return f_and(each(Rel::Eq));
    case Rel::Ne: return ne();
    case Rel::Lt: return l.size() == 1 ? f_atom(Rel::Lt, l[0], r[0]) : f_and(le(false), ne());
    case Rel::Gt: return l.size() == 1 ? f_atom(Rel::Gt, l[0], r[0]) : f_and(le(true), ne());
    }
    return f_false();
}

bool exists_sat(const std::vector<Atom> &atoms, const std::vector<VarDecl> &vars, const Problem &p) {
    TheoryHandle th(p);
    // finite sort: union-find over variables and constants
    std::map<std::string, std::string> parent;
    std::function<std::string(const std::string &)> find = [&](const std::string &x) -> std::string {
        auto it = parent.find(x);
        if (it == parent.end() || it->second == x)
            return x;
        return it->second = find(it->second);
    };
    auto key = [](const TermP &t) {
        if (t->k == Term::K::SConst)
            return "#" + t->name;
        if (t->k == Term::K::Var)
            return t->name;
        throw IllSortedAtom("finite-sort equation over a compound term: " + term_str(t));
    };
    WEnv env;
    std::vector<Form> cs;
    for (auto &v : vars) {
        if (v.sort->k == Sort::K::W || v.sort->k == Sort::K::Num) {
            auto comps = fresh_components(v.name, v.sort->k == Sort::K::W ? p.dim : 1);
            if (v.sort->k == Sort::K::W)
                cs.push_back(th.domain(comps));
            else if (th.nat())
                cs.push_back(f_atom(Rel::Ge, comps[0], LinTerm(0)));
            env[v.name] = comps;
        }
    }
    for (auto &a : atoms) {
        if (a.k == Atom::K::Eqs) {
            std::string x = find(key(a.lhs)), y = find(key(a.rhs));
            if (x == y)
                continue;
            // keep constants as representatives
            if (y[0] == '#')
                std::swap(x, y);
            if (x[0] == '#' && y[0] == '#')
                return false;
            parent[y] = x;
            parent.emplace(x, x);
        } else if (a.k == Atom::K::Bg) {
            cs.push_back(compile_atom(a, env, th));
        } else {
            throw IllSortedAtom("foreground atom in a constraint: " + atom_str(a));
        }
    }
    return exsat(f_and(std::move(cs)));
}

} // namespace lchc
