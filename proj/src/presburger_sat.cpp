#include "presburger_internal.hpp"

#include <algorithm>
#include <optional>
#include <unordered_map>

namespace lchc::pres::detail {

namespace {

using Conj = std::vector<Lit>;

// Pushes a literal after normalization. Returns false when the conjunction became false.
bool push_lit(Conj &c, Lit l) {
    Tri t = normalize(l);
    if (t == Tri::False)
        return false;
    if (t == Tri::True)
        return true;
    for (auto &o : c)
        if (o == l)
            return true;
    c.push_back(std::move(l));
    return true;
}

Lit subst_lit(const Lit &l, VarId x, const LinTerm &v) {
    Lit r = l;
    r.t = l.t.substitute(x, v);
    return r;
}

// Multiplies a literal through by k > 0.
Lit scale_lit(const Lit &l, const Int &k) {
    Lit r = l;
    r.t = l.t * k;
    if (l.k == Lit::Dv || l.k == Lit::Nd)
        r.m = l.m * k;
    return r;
}

std::vector<Conj> cooper_conj(const Conj &with, const Conj &rest, VarId x) {
    Int l = 1;
    for (auto &lit : with)
        l = lcm(l, abs(lit.t.coeff(x)));
    Conj scaled;
    for (auto &lit : with) {
        Int a = lit.t.coeff(x);
        Lit r = scale_lit(lit, l / abs(a));
        r.t = r.t.without(x) + LinTerm::var(x, sgn(a));
        scaled.push_back(r);
    }
    if (l > 1)
        scaled.push_back({Lit::Dv, l, LinTerm::var(x)});

    std::vector<LinTerm> lower, upper;
    Int D = 1;
    Conj divs;
    for (auto &lit : scaled) {
        Int a = lit.t.coeff(x);
        LinTerm s = lit.t.without(x);
        switch (lit.k) {
        case Lit::Le:
            if (a > 0)
                upper.push_back(-s + LinTerm(1));
            else
                lower.push_back(s - LinTerm(1));
            break;
        case Lit::Eq:
            // only non-unit equalities reach here; scaled coefficient is +-1
            lower.push_back((a > 0 ? -s : s) - LinTerm(1));
            upper.push_back((a > 0 ? -s : s) + LinTerm(1));
            break;
        default:
            D = lcm(D, lit.m);
            divs.push_back(lit);
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
    bool has_eq = std::any_of(scaled.begin(), scaled.end(), [](const Lit &l) { return l.k == Lit::Eq; });
    if (D > 1000000)
        throw std::runtime_error("presburger: divisibility period too large");
    long dmax = D.get_si();
    std::vector<Conj> out;
    for (long j = 1; j <= dmax; ++j) {
        LinTerm jj(use_lower ? j : -j);
        // x -> -inf (or +inf): bounds on the far side hold, the others fail
        if (!has_eq) {
            Conj c = rest;
            bool ok = true;
            for (auto &lit : scaled) {
                if (lit.k == Lit::Le) {
                    if ((lit.t.coeff(x) > 0) != use_lower) {
                        ok = false;
                        break;
                    }
                } else if (!push_lit(c, subst_lit(lit, x, jj))) {
                    ok = false;
                    break;
                }
            }
            if (ok)
                out.push_back(std::move(c));
        }
        for (auto &b : bounds) {
            Conj c = rest;
            bool ok = true;
            for (auto &lit : scaled)
                if (!push_lit(c, subst_lit(lit, x, b + jj))) {
                    ok = false;
                    break;
                }
            if (ok)
                out.push_back(std::move(c));
        }
    }
    return out;
}

} // namespace

std::vector<Conj> project_conj(const Conj &lits, VarId x) {
    Conj with, rest;
    for (auto &l : lits)
        (l.t.has(x) ? with : rest).push_back(l);
    if (with.empty())
        return {rest};

    // unit equality
    for (size_t i = 0; i < with.size(); ++i) {
        const Lit &e = with[i];
        if (e.k != Lit::Eq || abs(e.t.coeff(x)) != 1)
            continue;
        Int a = e.t.coeff(x);
        LinTerm v = e.t.without(x) * (-a);
        Conj c = rest;
        for (size_t j = 0; j < with.size(); ++j)
            if (j != i && !push_lit(c, subst_lit(with[j], x, v)))
                return {};
        return {c};
    }
    // non-unit equality: a x = -s, scale every other literal by a and substitute
    for (size_t i = 0; i < with.size(); ++i) {
        const Lit &e = with[i];
        if (e.k != Lit::Eq)
            continue;
        Int a = e.t.coeff(x);
        LinTerm s = e.t.without(x);
        if (a < 0) {
            a = -a;
            s = -s;
        }
        Conj c = rest;
        if (!push_lit(c, {Lit::Dv, a, s}))
            return {};
        LinTerm ax = -s; // value of a*x
        for (size_t j = 0; j < with.size(); ++j) {
            if (j == i)
                continue;
            Lit r = scale_lit(with[j], a);
            Int b = with[j].t.coeff(x); // r.t has coefficient a*b on x
            r.t = r.t.without(x) + ax * b;
            if (!push_lit(c, r))
                return {};
        }
        return {c};
    }
    bool has_div = false;
    Conj lo, up;
    for (auto &l : with) {
        if (l.k == Lit::Dv || l.k == Lit::Nd)
            has_div = true;
        else
            (l.t.coeff(x) < 0 ? lo : up).push_back(l);
    }
    if (!has_div) {
        if (lo.empty() || up.empty())
            return {rest};
        bool lo_unit = std::all_of(lo.begin(), lo.end(), [&](const Lit &l) { return l.t.coeff(x) == -1; });
        bool up_unit = std::all_of(up.begin(), up.end(), [&](const Lit &l) { return l.t.coeff(x) == 1; });
        if (lo_unit || up_unit) {
            Conj c = rest;
            for (auto &L : lo)
                for (auto &U : up) {
                    // L: a x + sl <= 0 (a<0), U: b x + su <= 0 (b>0)
                    Int a = -L.t.coeff(x), b = U.t.coeff(x);
                    LinTerm sl = L.t.without(x), su = U.t.without(x);
                    // lower unit: x = sl works iff b*sl + su <= 0; upper unit: x = -su works iff sl + a*su <= 0
                    LinTerm t = lo_unit ? sl * b + su : sl + su * a;
                    if (!push_lit(c, {Lit::Le, 0, t}))
                        return {};
                }
            return {c};
        }
    }
    return cooper_conj(with, rest, x);
}

namespace {

// Picks the cheapest variable to eliminate next.
std::optional<VarId> pick_var(const Conj &c) {
    struct Info {
        int occ = 0, lo = 0, up = 0;
        bool unit_eq = false, eq = false, div = false, lo_nonunit = false, up_nonunit = false;
    };
    std::unordered_map<VarId, Info> info;
    for (auto &l : c)
        for (auto &[v, a] : l.t.coeffs()) {
            auto &I = info[v];
            ++I.occ;
            switch (l.k) {
            case Lit::Eq:
                I.eq = true;
                if (abs(a) == 1)
                    I.unit_eq = true;
                break;
            case Lit::Le:
                if (a < 0) {
                    ++I.lo;
                    if (a != -1)
                        I.lo_nonunit = true;
                } else {
                    ++I.up;
                    if (a != 1)
                        I.up_nonunit = true;
                }
                break;
            default:
                I.div = true;
            }
        }
    if (info.empty())
        return std::nullopt;
    std::optional<VarId> best;
    long best_cost = 0;
    for (auto &[v, I] : info) {
        long cost;
        if (I.unit_eq)
            cost = 0;
        else if (I.eq)
            cost = 1;
        else if (!I.div && (I.lo == 0 || I.up == 0))
            cost = 2;
        else if (!I.div && (!I.lo_nonunit || !I.up_nonunit))
            cost = 10 + static_cast<long>(I.lo) * I.up;
        else
            cost = 1000 + static_cast<long>(I.lo + 1) * (I.up + 1) * 10;
        if (!best || cost < best_cost || (cost == best_cost && v < *best)) {
            best = v;
            best_cost = cost;
        }
    }
    return best;
}

bool conj_sat_rec(Conj c, int depth) {
    auto v = pick_var(c);
    if (!v)
        return true; // every literal was normalized to a non-constant or dropped
    for (auto &d : project_conj(c, *v))
        if (conj_sat_rec(std::move(d), depth + 1))
            return true;
    return false;
}

} // namespace

bool conj_sat(Conj lits) {
    Conj c;
    for (auto &l : lits)
        if (!push_lit(c, l))
            return false;
    return conj_sat_rec(std::move(c), 0);
}

// ---------------------------------------------------------------- DPLL over NNF

namespace {

struct Bound {
    std::optional<Int> lo, hi;
};
using Bounds = std::unordered_map<VarId, Bound>;

std::optional<Int> term_min(const LinTerm &t, const Bounds &b, VarId skip = -1) {
    Int r = t.constant();
    for (auto &[v, a] : t.coeffs()) {
        if (v == skip)
            continue;
        auto it = b.find(v);
        if (it == b.end())
            return std::nullopt;
        const auto &side = a > 0 ? it->second.lo : it->second.hi;
        if (!side)
            return std::nullopt;
        r += a * *side;
    }
    return r;
}

std::optional<Int> term_max(const LinTerm &t, const Bounds &b) {
    auto m = term_min(-t, b);
    if (!m)
        return std::nullopt;
    return Int(-*m);
}

bool tighten(Bounds &b, VarId v, bool upper, const Int &val, bool &changed) {
    auto &B = b[v];
    if (upper) {
        if (!B.hi || val < *B.hi) {
            B.hi = val;
            changed = true;
        }
    } else {
        if (!B.lo || val > *B.lo) {
            B.lo = val;
            changed = true;
        }
    }
    return !(B.lo && B.hi && *B.lo > *B.hi);
}

// Interval propagation of t <= 0 literals. Returns false on conflict.
bool propagate(const Conj &units, Bounds &b) {
    for (int round = 0; round < 24; ++round) {
        bool changed = false;
        for (auto &l : units) {
            if (l.k == Lit::Dv || l.k == Lit::Nd)
                continue;
            for (int pass = 0; pass < (l.k == Lit::Eq ? 2 : 1); ++pass) {
                LinTerm t = pass == 0 ? l.t : -l.t;
                for (auto &[v, a] : t.coeffs()) {
                    auto m = term_min(t, b, v);
                    if (!m)
                        continue;
                    // a v <= -m
                    Int rhs = -*m, q;
                    if (a > 0) {
                        mpz_fdiv_q(q.get_mpz_t(), rhs.get_mpz_t(), a.get_mpz_t());
                        if (!tighten(b, v, true, q, changed))
                            return false;
                    } else {
                        mpz_cdiv_q(q.get_mpz_t(), rhs.get_mpz_t(), a.get_mpz_t());
                        if (!tighten(b, v, false, q, changed))
                            return false;
                    }
                }
            }
        }
        if (!changed)
            return true;
    }
    return true;
}

Tri lit_under(const Lit &l, const Bounds &b) {
    switch (l.k) {
    case Lit::Le: {
        auto mx = term_max(l.t, b);
        if (mx && *mx <= 0)
            return Tri::True;
        auto mn = term_min(l.t, b);
        if (mn && *mn > 0)
            return Tri::False;
        return Tri::Open;
    }
    case Lit::Eq: {
        auto mx = term_max(l.t, b);
        auto mn = term_min(l.t, b);
        if ((mx && *mx < 0) || (mn && *mn > 0))
            return Tri::False;
        if (mx && mn && *mx == 0 && *mn == 0)
            return Tri::True;
        return Tri::Open;
    }
    default: {
        auto mx = term_max(l.t, b);
        auto mn = term_min(l.t, b);
        if (mx && mn && *mx == *mn) {
            bool d = mpz_divisible_p(mx->get_mpz_t(), l.m.get_mpz_t()) != 0;
            return d == (l.k == Lit::Dv) ? Tri::True : Tri::False;
        }
        return Tri::Open;
    }
    }
}

NodeP simplify(const NodeP &n, const Bounds &b) {
    switch (n->k) {
    case Node::T:
    case Node::F:
        return n;
    case Node::L: {
        Tri t = lit_under(n->lit, b);
        return t == Tri::True ? n_true() : t == Tri::False ? n_false() : n;
    }
    case Node::And:
    case Node::Or: {
        std::vector<NodeP> ks;
        bool same = true;
        for (auto &c : n->kids) {
            ks.push_back(simplify(c, b));
            if (ks.back() != c)
                same = false;
        }
        if (same)
            return n;
        return n->k == Node::And ? n_and(std::move(ks)) : n_or(std::move(ks));
    }
    }
    return n;
}

// Box of a conjunction of single-variable bounds; nullopt when the node is not such a box.
std::optional<Bounds> as_box(const NodeP &n) {
    Bounds b;
    auto add = [&](const Lit &l) {
        if (l.k == Lit::Dv || l.k == Lit::Nd || l.t.coeffs().size() != 1)
            return false;
        auto [v, a] = l.t.coeffs()[0];
        Int rhs = -l.t.constant(), q;
        bool changed = false;
        if (l.k == Lit::Eq) {
            if (abs(a) != 1)
                return false;
            Int val = rhs * a;
            tighten(b, v, true, val, changed);
            tighten(b, v, false, val, changed);
            return true;
        }
        if (a > 0) {
            mpz_fdiv_q(q.get_mpz_t(), rhs.get_mpz_t(), a.get_mpz_t());
            tighten(b, v, true, q, changed);
        } else {
            mpz_cdiv_q(q.get_mpz_t(), rhs.get_mpz_t(), a.get_mpz_t());
            tighten(b, v, false, q, changed);
        }
        return true;
    };
    if (n->k == Node::L) {
        if (!add(n->lit))
            return std::nullopt;
        return b;
    }
    if (n->k != Node::And)
        return std::nullopt;
    for (auto &c : n->kids)
        if (c->k != Node::L || !add(c->lit))
            return std::nullopt;
    return b;
}

bool box_contains(const Bounds &outer, const Bounds &inner) {
    for (auto &[v, o] : outer) {
        auto it = inner.find(v);
        const Bound empty;
        const Bound &i = it == inner.end() ? empty : it->second;
        if (o.lo && (!i.lo || *i.lo < *o.lo))
            return false;
        if (o.hi && (!i.hi || *i.hi > *o.hi))
            return false;
    }
    return true;
}

// Drops disjuncts that are boxes contained in another box disjunct.
NodeP drop_subsumed(const NodeP &n) {
    if (n->k != Node::Or || n->kids.size() > 256)
        return n;
    std::vector<std::optional<Bounds>> boxes;
    for (auto &c : n->kids)
        boxes.push_back(as_box(c));
    std::vector<bool> dead(n->kids.size(), false);
    bool any = false;
    for (size_t i = 0; i < boxes.size(); ++i) {
        if (!boxes[i])
            continue;
        for (size_t j = 0; j < boxes.size() && !dead[i]; ++j) {
            if (i == j || dead[j] || !boxes[j])
                continue;
            if (box_contains(*boxes[j], *boxes[i]) && (!box_contains(*boxes[i], *boxes[j]) || j < i)) {
                dead[i] = true;
                any = true;
            }
        }
    }
    if (!any)
        return n;
    std::vector<NodeP> ks;
    for (size_t i = 0; i < dead.size(); ++i)
        if (!dead[i])
            ks.push_back(n->kids[i]);
    return n_or(std::move(ks));
}

size_t node_size(const NodeP &n) {
    size_t s = 1;
    for (auto &c : n->kids)
        s += node_size(c);
    return s;
}

bool dpll(Conj units, std::vector<NodeP> pending) {
    for (;;) {
        // absorb top-level conjunctions and literals into units
        std::vector<NodeP> ors;
        std::vector<NodeP> work = std::move(pending);
        while (!work.empty()) {
            NodeP n = work.back();
            work.pop_back();
            switch (n->k) {
            case Node::T:
                break;
            case Node::F:
                return false;
            case Node::L:
                if (!push_lit(units, n->lit))
                    return false;
                break;
            case Node::And:
                for (auto &c : n->kids)
                    work.push_back(c);
                break;
            case Node::Or:
                ors.push_back(n);
                break;
            }
        }
        Bounds b;
        if (!propagate(units, b))
            return false;
        for (auto &u : units)
            if (lit_under(u, b) == Tri::False)
                return false;
        bool progress = false;
        for (auto &o : ors) {
            NodeP s = drop_subsumed(simplify(o, b));
            if (s != o)
                progress = true;
            if (s->k == Node::F)
                return false;
            if (s->k != Node::T)
                pending.push_back(s);
        }
        if (progress)
            continue;
        if (!conj_sat(units))
            return false;
        if (pending.empty())
            return true;
        // branch on the smallest disjunction
        size_t best = 0;
        for (size_t i = 1; i < pending.size(); ++i) {
            size_t a = pending[i]->kids.size(), c = pending[best]->kids.size();
            if (a < c || (a == c && node_size(pending[i]) < node_size(pending[best])))
                best = i;
        }
        NodeP split = pending[best];
        pending.erase(pending.begin() + static_cast<long>(best));
        for (auto &k : split->kids) {
            auto p = pending;
            p.push_back(k);
            if (dpll(units, std::move(p)))
                return true;
        }
        return false;
    }
}

} // namespace

bool node_sat(const NodeP &n) { return dpll({}, {n}); }

} // namespace lchc::pres::detail
