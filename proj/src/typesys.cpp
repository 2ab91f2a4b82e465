#include "lchc/typesys.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace lchc {

TypeError::TypeError(Loc l, std::string t, std::string e, std::string a)
    : std::runtime_error(l.str() + ": ill-typed term " + t + ": expected " + e + ", found " + a), loc(l),
      term(std::move(t)), expected(std::move(e)), actual(std::move(a)) {}

UnboundVariable::UnboundVariable(Loc l, const std::string &name)
    : std::runtime_error(l.str() + ": unbound variable '" + name + "'"), loc(l) {}

namespace {

bool numeric(const SortP &s) { return s->k == Sort::K::W || s->k == Sort::K::Num; }

} // namespace

SortP infer_sort(const TermP &t, const Env &env, const Problem &p) {
    auto str = [&](const SortP &s) { return sort_str(s, p.fin_name); };
    switch (t->k) {
    case Term::K::Var: {
        auto it = env.find(t->name);
        if (it == env.end())
            throw UnboundVariable(t->loc, t->name);
        return it->second;
    }
    case Term::K::Pred: {
        SortP s = p.decl(t->name);
        if (!s)
            throw UnboundVariable(t->loc, t->name);
        return s;
    }
    case Term::K::SConst:
        if (p.fin_index(t->name) < 0)
            throw UnboundVariable(t->loc, t->name);
        return s_fin();
    case Term::K::Bool:
        return s_prop();
    case Term::K::WLit:
        if (t->is_tuple) {
            if (static_cast<int>(t->tuple.size()) != p.dim)
                throw TypeError(t->loc, term_str(t), "a tuple of " + std::to_string(p.dim) + " components",
                                std::to_string(t->tuple.size()) + " components");
            if (p.theory == Theory::Nat)
                for (auto &v : t->tuple)
                    if (v < 0)
                        throw TypeError(t->loc, term_str(t), "natural components", "a negative component");
            return s_w();
        }
        return p.dim == 1 ? s_w() : s_num();
    case Term::K::Add:
    case Term::K::Sub: {
        SortP a = infer_sort(t->a, env, p), b = infer_sort(t->b, env, p);
        if (!numeric(a))
            throw TypeError(t->a->loc, term_str(t->a), "a numeric term", str(a));
        if (!sort_eq(a, b))
            throw TypeError(t->b->loc, term_str(t->b), str(a), str(b));
        return a;
    }
    case Term::K::Neg:
    case Term::K::Scale: {
        SortP a = infer_sort(t->a, env, p);
        if (!numeric(a))
            throw TypeError(t->a->loc, term_str(t->a), "a numeric term", str(a));
        return a;
    }
    case Term::K::Comp: {
        SortP a = infer_sort(t->a, env, p);
        if (a->k != Sort::K::W)
            throw TypeError(t->a->loc, term_str(t->a), "W", str(a));
        if (t->comp < 1 || t->comp > p.dim)
            throw TypeError(t->loc, term_str(t), "a component index in 1.." + std::to_string(p.dim),
                            std::to_string(t->comp));
        return p.dim == 1 ? s_w() : s_num();
    }
    case Term::K::App: {
        SortP f = infer_sort(t->a, env, p);
        if (f->k != Sort::K::Arrow)
            throw TypeError(t->loc, term_str(t), "a function", str(f));
        SortP x = infer_sort(t->b, env, p);
        if (!sort_eq(f->arg, x))
            throw TypeError(t->b->loc, term_str(t->b), str(f->arg), str(x));
        return f->res;
    }
    }
    throw std::logic_error("infer_sort");
}

int type_order(const SortP &s) {
    if (s->k != Sort::K::Arrow)
        return 0;
    return std::max(type_order(s->arg) + 1, type_order(s->res));
}

InitialCheck is_initial(const SortP &s) {
    InitialCheck r;
    if (!is_relational(s)) {
        r.ok = false;
        r.condition = "relational";
        r.detail = "not a relational sort";
        return r;
    }
    auto args = sort_args(s);
    std::optional<size_t> wpos;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i]->k != Sort::K::W)
            continue;
        if (wpos) {
            r.ok = false;
            r.condition = "O1";
            r.position = i + 1;
            r.detail = "second W argument at position " + std::to_string(i + 1);
            return r;
        }
        wpos = i;
    }
    if (wpos) {
        std::vector<SortP> suffix(args.begin() + static_cast<long>(*wpos), args.end());
        int so = type_order(s_arrows(suffix, s_prop()));
        for (size_t i = 0; i < *wpos; ++i)
            if (type_order(args[i]) >= so) {
                r.ok = false;
                r.condition = "O2";
                r.position = i + 1;
                r.detail = "argument " + std::to_string(i + 1) + " has order " + std::to_string(type_order(args[i])) +
                           ", not below the order " + std::to_string(so) + " of the suffix from W";
                return r;
            }
    }
    for (size_t i = 0; i < args.size(); ++i) {
        auto k = args[i]->k;
        if (k == Sort::K::Fin || k == Sort::K::W)
            continue;
        if (k == Sort::K::Num || !is_relational(args[i])) {
            r.ok = false;
            r.condition = "O3";
            r.position = i + 1;
            r.detail = "argument " + std::to_string(i + 1) + " is neither S, W nor relational";
            return r;
        }
        InitialCheck sub = is_initial(args[i]);
        if (!sub.ok) {
            r.ok = false;
            r.condition = "O3";
            r.position = i + 1;
            r.detail = "argument " + std::to_string(i + 1) + " is not initial (" + sub.condition + ": " + sub.detail + ")";
            return r;
        }
    }
    return r;
}

bool is_active(const SortP &s) { return w_position(s).has_value(); }

TypeClass classify(const SortP &s) {
    TypeClass c;
    c.order = type_order(s);
    if (!is_relational(s)) {
        c.activity = Activity::NonRelational;
        return c;
    }
    c.initial = is_initial(s).ok;
    c.activity = is_active(s) ? Activity::Active : Activity::Inactive;
    return c;
}

const char *mode_name(Mode m) {
    switch (m) {
    case Mode::FirstOrder: return "FirstOrder";
    case Mode::InitialHigherOrder: return "InitialHigherOrder";
    case Mode::Rejected: return "Rejected";
    }
    return "?";
}

std::string ValidationReport::text() const {
    std::ostringstream o;
    if (mode == Mode::Rejected) {
        o << "Rejected(";
        for (size_t i = 0; i < violations.size(); ++i)
            o << (i ? "; " : "") << violations[i].substr(0, violations[i].find(':'));
        o << ")\n";
        for (auto &v : violations)
            if (v.find(':') != std::string::npos)
                o << "  " << v << "\n";
    } else {
        o << mode_name(mode) << ", l = " << max_order << "\n";
    }
    for (auto &[n, c] : preds)
        o << "  " << n << ": order " << c.order << ", " << (c.initial ? "initial" : "not initial") << ", "
          << (c.activity == Activity::Active ? "active" : c.activity == Activity::Inactive ? "inactive" : "non-relational")
          << "\n";
    for (auto &l : inserted_limits)
        o << "  inserted limit clause for " << l << "\n";
    return o.str();
}

std::string ValidationReport::json() const {
    nlohmann::ordered_json j;
    j["mode"] = mode_name(mode);
    j["maxOrder"] = max_order;
    j["predicates"] = nlohmann::ordered_json::object();
    for (auto &[n, c] : preds)
        j["predicates"][n] = {{"order", c.order}, {"initial", c.initial}, {"active", c.activity == Activity::Active}};
    j["violations"] = violations;
    j["insertedLimitClauses"] = inserted_limits;
    return j.dump();
}

namespace {

void fg_heads(const BodyP &b, std::vector<Atom> &out) {
    if (b->k == Body::K::AtomK) {
        if (b->atom.k == Atom::K::Fg)
            out.push_back(b->atom);
        return;
    }
    for (auto &k : b->kids)
        fg_heads(k, out);
}

void check_literals(const TermP &t, const Problem &p, std::vector<std::string> &v, const std::string &where) {
    if (t->k == Term::K::WLit && p.theory == Theory::Nat)
        for (auto &c : t->tuple)
            if (c < 0)
                v.push_back(where + ": negative literal " + term_str(t) + " over the naturals");
    if (t->a)
        check_literals(t->a, p, v, where);
    if (t->b)
        check_literals(t->b, p, v, where);
}

} // namespace

ValidationReport validate(const Problem &p) {
    ValidationReport r;
    bool higher = false;
    for (auto &[n, s] : p.decls) {
        TypeClass c = classify(s);
        r.preds[n] = c;
        r.max_order = std::max(r.max_order, c.order);
        if (c.activity == Activity::NonRelational) {
            r.violations.push_back("relational at " + n + ": declared sort is not relational");
            continue;
        }
        InitialCheck ic = is_initial(s);
        if (!ic.ok)
            r.violations.push_back(ic.condition + " at " + n + ": " + ic.detail);
        for (auto &a : sort_args(s))
            if (a->k != Sort::K::Fin && a->k != Sort::K::W)
                higher = true;
    }
    for (auto &[n, s] : p.decls) {
        if (!w_position(s))
            continue;
        bool found = false;
        for (auto &c : p.clauses)
            if (!c.goal && c.head == n && is_limit_clause(p, c)) {
                found = true;
                if (c.loc.line == 0)
                    r.inserted_limits.push_back(n);
            }
        if (!found)
            r.violations.push_back("limit at " + n + ": no limit clause");
    }
    auto check_clause = [&](const Clause &c, const std::string &where) {
        Env env;
        for (auto &v : c.vars) {
            env[v.name] = v.sort;
            if (v.sort->k == Sort::K::Num) {
                r.violations.push_back(where + ": variable " + v.name + " has the component sort");
                continue;
            }
            if (v.sort->k != Sort::K::Arrow)
                continue;
            TypeClass tc = classify(v.sort);
            if (tc.activity == Activity::NonRelational || !tc.initial)
                r.violations.push_back(where + ": variable " + v.name + " has a sort that is not initial");
            else if (tc.order > r.max_order)
                r.violations.push_back(where + ": variable " + v.name + " has order " + std::to_string(tc.order) +
                                       " above the maximal predicate order " + std::to_string(r.max_order));
        }
        std::vector<Atom> atoms;
        fg_heads(c.body, atoms);
        for (auto &a : atoms) {
            std::vector<TermP> args;
            TermP h = spine(a.fg, args);
            if (h->k == Term::K::Var)
                higher = true;
            try {
                if (infer_sort(a.fg, env, p)->k != Sort::K::Prop)
                    r.violations.push_back(where + ": atom " + atom_str(a) + " is not a formula");
            } catch (const std::exception &e) {
                r.violations.push_back(where + ": " + e.what());
            }
            check_literals(a.fg, p, r.violations, where);
        }
        for (auto &h : c.head_args)
            check_literals(h, p, r.violations, where);
    };
    for (size_t i = 0; i < p.clauses.size(); ++i)
        check_clause(p.clauses[i], "clause " + std::to_string(i + 1));
    for (size_t i = 0; i < p.goals.size(); ++i)
        check_clause(p.goals[i], "goal " + std::to_string(i + 1));
    if (!r.violations.empty())
        r.mode = Mode::Rejected;
    else if (r.max_order <= 1 && !higher)
        r.mode = Mode::FirstOrder;
    else
        r.mode = Mode::InitialHigherOrder;
    return r;
}

} // namespace lchc
