#include "lchc/entwined.hpp"

namespace lchc {

using pres::f_and;
using pres::f_bool;
using pres::f_false;
using pres::f_not;
using pres::f_or;
using pres::f_true;
using pres::Form;

namespace {

bool is_false(const Form &f) { return f->kind == pres::Formula::Kind::False; }

struct Ctx {
    const Structure &m;
    const Valuation &v;
    Form dom;
};

std::vector<Branch> eval(const Ctx &c, const TermP &t);
std::vector<Branch> apply(const Ctx &c, const Form &guard, const Val &f, const Val &x);
Form resolve(const Ctx &c, const Val &p);

Val prop_val(Form f) {
    Val r;
    r.k = Val::K::Prop;
    r.prop = std::move(f);
    return r;
}

bool lambda_head(const Ctx &c, const Val &p) {
    return p.k == Val::K::Partial && p.head == Val::H::Pred && c.m.table(p.pred).lambda != nullptr;
}

uint64_t top_index(const Frame &f) {
    if (f.k == Frame::K::Inactive)
        return f.keys >= 64 ? ~uint64_t(0) : (uint64_t(1) << f.keys) - 1;
    return 0;
}

// Index of an argument tuple in a mixed radix over the frames.
uint64_t key_of(const std::vector<const Frame *> &fs, const std::vector<uint64_t> &xs) {
    uint64_t k = 0;
    for (size_t i = 0; i < xs.size(); ++i)
        k = k * fs[i]->size + xs[i];
    return k;
}

std::vector<uint64_t> elems_of(const std::vector<Val> &args, size_t from, size_t to) {
    std::vector<uint64_t> r;
    for (size_t i = from; i < to; ++i) {
        if (args[i].k != Val::K::Elem)
            throw std::logic_error("expected a frame element argument");
        r.push_back(args[i].idx);
    }
    return r;
}

// Row function of a partial application that already received its W
// argument: key over the remaining arguments -> descriptor.
struct PendingW {
    std::vector<LinTerm> w;
    std::function<Upset(uint64_t)> row;
};

PendingW pending_w(const Ctx &c, const Val &p) {
    PendingW r;
    size_t wi = 0;
    while (wi < p.args.size() && p.args[wi].k != Val::K::W)
        ++wi;
    if (wi == p.args.size())
        throw std::logic_error("no W argument");
    r.w = p.args[wi].w;
    const Frame &rest = c.m.frame(p.sort);
    uint64_t rest_keys = rest.keys;
    if (p.head == Val::H::Pred) {
        const PredInfo &pi = c.m.pred(p.pred);
        std::vector<const Frame *> fs;
        for (auto &s : pi.key_sorts)
            fs.push_back(&c.m.frame(s));
        auto xs = elems_of(p.args, 0, wi);
        auto post = elems_of(p.args, wi + 1, p.args.size());
        xs.insert(xs.end(), post.begin(), post.end());
        uint64_t prefix = key_of(fs, xs);
        std::string name = p.pred;
        const Structure *m = &c.m;
        r.row = [m, name, prefix, rest_keys](uint64_t b) { return m->row(name, prefix * rest_keys + b); };
        return r;
    }
    // Elem head: a CaseII element applied to W and then some post arguments
    const Frame &f = c.m.frame(p.head_sort);
    if (f.k != Frame::K::CaseII)
        throw std::logic_error("W argument applied to a non W-headed element");
    auto post = elems_of(p.args, 1, p.args.size());
    uint64_t prefix = key_of(f.args, post);
    const std::vector<Upset> *rows = &f.rows.at(p.head_idx);
    r.row = [rows, prefix, rest_keys](uint64_t b) { return (*rows)[prefix * rest_keys + b]; };
    return r;
}

// Converts a value to a frame element of sort s, splitting on the W regions
// of a pending-W partial application.
std::vector<Branch> to_elem(const Ctx &c, const Form &guard, const Val &x, const SortP &s) {
    if (x.k == Val::K::Elem)
        return {{guard, x}};
    if (x.k == Val::K::Prop) {
        std::vector<Branch> r;
        Form t = f_and(guard, x.prop), e = f_and(guard, f_not(x.prop));
        if (!is_false(t))
            r.push_back({t, elem_val(s_prop(), 1)});
        if (!is_false(e))
            r.push_back({e, elem_val(s_prop(), 0)});
        for (auto &b : r)
            b.v.k = Val::K::Elem;
        return r;
    }
    if (x.k != Val::K::Partial)
        throw std::logic_error("a W value where a relation was expected");
    const Frame &f = c.m.frame(s);
    if (f.huge)
        throw FrameTooLarge("frame of " + sort_str(s, c.m.problem().fin_name) + " is too large");
    if (x.head == Val::H::Top)
        return {{guard, elem_val(s, top_index(f))}};
    bool has_w = false;
    for (auto &a : x.args)
        has_w |= a.k == Val::K::W;
    if (!has_w) {
        if (x.head == Val::H::Elem)
            return {{guard, elem_val(s, x.head_idx)}};
        return {{guard, elem_val(s, c.m.partial_elem(x.pred, elems_of(x.args, 0, x.args.size())))}};
    }
    if (f.k != Frame::K::Inactive)
        throw std::logic_error("pending W application of an active sort");
    PendingW pw = pending_w(c, x);
    std::vector<Upset> distinct;
    std::vector<size_t> which(f.keys);
    for (uint64_t b = 0; b < f.keys; ++b) {
        Upset u = pw.row(b);
        auto it = std::find(distinct.begin(), distinct.end(), u);
        which[b] = static_cast<size_t>(it - distinct.begin());
        if (it == distinct.end())
            distinct.push_back(u);
    }
    if (distinct.size() > 16)
        throw FrameTooLarge("too many W regions");
    const TheoryHandle &th = c.m.theory();
    std::vector<Form> mem;
    for (auto &u : distinct)
        mem.push_back(th.to_formula(u, pw.w));
    std::vector<Branch> r;
    for (uint64_t sign = 0; sign < (uint64_t(1) << distinct.size()); ++sign) {
        std::vector<Form> cs{guard};
        for (size_t i = 0; i < distinct.size(); ++i)
            cs.push_back((sign >> i) & 1 ? mem[i] : f_not(mem[i]));
        Form g = f_and(std::move(cs));
        if (is_false(g) || !pres::satisfiable(f_and(c.dom, g)))
            continue;
        uint64_t e = 0;
        for (uint64_t b = 0; b < f.keys; ++b)
            if ((sign >> which[b]) & 1)
                e |= uint64_t(1) << b;
        r.push_back({g, elem_val(s, e)});
    }
    return r;
}

Form resolve(const Ctx &c, const Val &p) {
    if (p.head == Val::H::Top)
        return f_true();
    if (p.head == Val::H::Pred) {
        const PredInfo &pi = c.m.pred(p.pred);
        const Table &t = c.m.table(p.pred);
        if (t.lambda) {
            Valuation v;
            v.domain = c.v.domain;
            for (size_t i = 0; i < t.lambda->params.size(); ++i) {
                const Val &a = p.args.at(i);
                if (a.k == Val::K::W)
                    v.wenv[t.lambda->params[i].name] = a.w;
                else
                    v.vals[t.lambda->params[i].name] = a;
            }
            for (auto &d : t.lambda->tops)
                v.vals[d.name] = elem_val(d.sort, top_index(c.m.frame(d.sort)));
            return eval_atom(c.m, t.lambda->body, v);
        }
        if (!pi.active)
            return f_bool(c.m.truth(p.pred, c.m.encode_key(p.pred, elems_of(p.args, 0, p.args.size()))));
        std::vector<uint64_t> xs = elems_of(p.args, 0, pi.wpos);
        auto post = elems_of(p.args, pi.wpos + 1, p.args.size());
        xs.insert(xs.end(), post.begin(), post.end());
        return c.m.theory().to_formula(c.m.row(p.pred, c.m.encode_key(p.pred, xs)), p.args[pi.wpos].w);
    }
    const Frame &f = c.m.frame(p.head_sort);
    if (f.k != Frame::K::CaseII)
        throw std::logic_error("unexpected element head");
    auto post = elems_of(p.args, 1, p.args.size());
    return c.m.theory().to_formula(f.rows.at(p.head_idx).at(key_of(f.args, post)), p.args[0].w);
}

Val partial_of(const Val &x) {
    if (x.k == Val::K::Partial)
        return x;
    Val r;
    r.k = Val::K::Partial;
    r.head = Val::H::Elem;
    r.sort = x.sort;
    r.head_sort = x.sort;
    r.head_idx = x.idx;
    return r;
}

std::vector<Branch> apply(const Ctx &c, const Form &guard, const Val &fv, const Val &x) {
    if (fv.k != Val::K::Elem && fv.k != Val::K::Partial)
        throw std::logic_error("application of a non-relation");
    if (!fv.sort || fv.sort->k != Sort::K::Arrow)
        throw std::logic_error("application of a value of base sort");
    SortP arg = fv.sort->arg, res = fv.sort->res;

    // Eager slicing of Inactive and Fun elements by a leading argument.
    if (fv.k == Val::K::Elem && arg->k != Sort::K::W) {
        const Frame &f = c.m.frame(fv.sort);
        if (f.k == Frame::K::Inactive || f.k == Frame::K::Fun) {
            std::vector<Branch> r;
            for (auto &xb : to_elem(c, guard, x, arg)) {
                uint64_t rest = f.keys / f.args[0]->size;
                uint64_t e = f.slice(fv.idx, xb.v.idx, rest);
                if (res->k == Sort::K::Prop)
                    r.push_back({xb.guard, prop_val(f_bool(e & 1))});
                else
                    r.push_back({xb.guard, elem_val(res, e)});
            }
            return r;
        }
    }

    Val p = partial_of(fv);
    std::vector<Branch> xs;
    if (arg->k == Sort::K::W || arg->k == Sort::K::Num)
        xs = {{guard, x}};
    else if (lambda_head(c, p))
        xs = {{guard, x}};
    else
        xs = to_elem(c, guard, x, arg);
    std::vector<Branch> r;
    for (auto &xb : xs) {
        Val q = p;
        q.args.push_back(xb.v);
        q.sort = res;
        if (res->k == Sort::K::Prop)
            r.push_back({xb.guard, prop_val(resolve(c, q))});
        else
            r.push_back({xb.guard, std::move(q)});
    }
    return r;
}

std::vector<Branch> eval(const Ctx &c, const TermP &t) {
    const Problem &p = c.m.problem();
    switch (t->k) {
    case Term::K::Var: {
        auto it = c.v.vals.find(t->name);
        if (it != c.v.vals.end())
            return {{f_true(), it->second}};
        auto w = c.v.wenv.find(t->name);
        if (w != c.v.wenv.end())
            return {{f_true(), w_val(w->second)}};
        throw MissingValuation("no value for variable " + t->name);
    }
    case Term::K::Pred: {
        Val v;
        v.k = Val::K::Partial;
        v.head = Val::H::Pred;
        v.pred = t->name;
        v.sort = p.decl(t->name);
        if (!v.sort)
            throw MissingValuation("undeclared predicate " + t->name);
        v.head_sort = v.sort;
        if (v.sort->k == Sort::K::Prop)
            return {{f_true(), prop_val(resolve(c, v))}};
        return {{f_true(), v}};
    }
    case Term::K::SConst: {
        int i = p.fin_index(t->name);
        if (i < 0)
            throw MissingValuation("unknown constant " + t->name);
        return {{f_true(), elem_val(s_fin(), static_cast<uint64_t>(i))}};
    }
    case Term::K::Bool: return {{f_true(), prop_val(f_bool(t->bval))}};
    case Term::K::App: {
        std::vector<Branch> r;
        for (auto &fb : eval(c, t->a))
            for (auto &xb : eval(c, t->b)) {
                Form g = f_and(fb.guard, xb.guard);
                if (is_false(g))
                    continue;
                for (auto &b : apply(c, g, fb.v, xb.v))
                    r.push_back(std::move(b));
            }
        return r;
    }
    default: return {{f_true(), w_val(compile_term(t, c.v.wenv, c.m.theory()))}};
    }
}

Form branches_formula(const std::vector<Branch> &bs) {
    std::vector<Form> ds;
    for (auto &b : bs) {
        if (b.v.k == Val::K::Prop)
            ds.push_back(f_and(b.guard, b.v.prop));
        else if (b.v.k == Val::K::Elem && b.v.sort && b.v.sort->k == Sort::K::Prop)
            ds.push_back(f_and(b.guard, f_bool(b.v.idx == 1)));
        else
            throw std::logic_error("atom does not evaluate to a truth value");
    }
    return f_or(std::move(ds));
}

Form domain_of(const Valuation &v) { return f_and(v.domain); }

Form body_rec(const Structure &m, const BodyP &b, Valuation &v) {
    switch (b->k) {
    case Body::K::True: return f_true();
    case Body::K::False: return f_false();
    case Body::K::And: {
        std::vector<Form> cs;
        for (auto &k : b->kids) {
            cs.push_back(body_rec(m, k, v));
            if (is_false(cs.back()))
                return f_false();
        }
        return f_and(std::move(cs));
    }
    case Body::K::Or: {
        std::vector<Form> cs;
        for (auto &k : b->kids)
            cs.push_back(body_rec(m, k, v));
        return f_or(std::move(cs));
    }
    case Body::K::Exists: {
        Valuation inner = v;
        std::vector<const VarDecl *> finite;
        for (auto &d : b->binders) {
            if (d.sort->k == Sort::K::W || d.sort->k == Sort::K::Num) {
                auto comps = fresh_components(d.name, d.sort->k == Sort::K::W ? m.problem().dim : 1);
                inner.wenv[d.name] = comps;
                inner.domain.push_back(m.theory().domain(comps));
            } else {
                finite.push_back(&d);
            }
        }
        // finite binders become a disjunction over their frames
        std::vector<Form> ds;
        std::function<void(size_t)> rec = [&](size_t i) {
            if (i == finite.size()) {
                Valuation w = inner;
                ds.push_back(body_rec(m, b->kids.at(0), w));
                return;
            }
            const Frame &f = m.frame(finite[i]->sort);
            if (f.huge || f.size > kFrameCap)
                throw FrameTooLarge("existential over a large frame");
            for (uint64_t e = 0; e < f.size; ++e) {
                inner.vals[finite[i]->name] = elem_val(finite[i]->sort, e);
                rec(i + 1);
            }
        };
        rec(0);
        Form r = f_or(std::move(ds));
        // new components range over the domain
        std::vector<Form> cs{r};
        for (size_t i = v.domain.size(); i < inner.domain.size(); ++i)
            cs.push_back(inner.domain[i]);
        return f_and(std::move(cs));
    }
    case Body::K::AtomK: {
        const Atom &a = b->atom;
        switch (a.k) {
        case Atom::K::Bg: return compile_atom(a, v.wenv, m.theory());
        case Atom::K::Eqs: {
            Ctx c{m, v, domain_of(v)};
            std::vector<Form> ds;
            for (auto &l : eval(c, a.lhs))
                for (auto &r : eval(c, a.rhs))
                    ds.push_back(f_and({l.guard, r.guard, f_bool(l.v.idx == r.v.idx)}));
            return f_or(std::move(ds));
        }
        case Atom::K::Fg: return eval_atom(m, a.fg, v);
        }
    }
    }
    return f_false();
}

} // namespace

Val elem_val(const SortP &s, uint64_t idx) {
    Val r;
    if (s->k == Sort::K::Prop) {
        r.k = Val::K::Prop;
        r.prop = f_bool(idx == 1);
        r.sort = s;
        r.idx = idx;
        return r;
    }
    r.k = Val::K::Elem;
    r.sort = s;
    r.idx = idx;
    return r;
}

Val w_val(const std::vector<LinTerm> &w) {
    Val r;
    r.k = Val::K::W;
    r.w = w;
    return r;
}

std::vector<Branch> eval_branches(const Structure &m, const TermP &t, const Valuation &v) {
    Ctx c{m, v, domain_of(v)};
    return eval(c, t);
}

Form eval_atom(const Structure &m, const TermP &atom, const Valuation &v) {
    return branches_formula(eval_branches(m, atom, v));
}

bool eval_closed(const Structure &m, const TermP &atom) {
    Valuation v;
    return pres::satisfiable(eval_atom(m, atom, v));
}

void for_each_valuation(const Structure &m, const std::vector<VarDecl> &vars, const CheckOptions &opt,
                        const std::function<bool(const Valuation &)> &f) {
    Valuation base;
    std::vector<const VarDecl *> finite;
    uint64_t total = 1;
    for (auto &d : vars) {
        if (d.sort->k == Sort::K::W || d.sort->k == Sort::K::Num) {
            auto comps = fresh_components(d.name, d.sort->k == Sort::K::W ? m.problem().dim : 1);
            base.wenv[d.name] = comps;
            base.domain.push_back(m.theory().domain(comps));
            continue;
        }
        const Frame &fr = m.frame(d.sort);
        if (fr.huge || fr.size > opt.max_valuations)
            throw FrameTooLarge("frame of " + sort_str(d.sort, m.problem().fin_name) + " is too large to enumerate");
        total *= fr.size;
        if (total > opt.max_valuations)
            throw FrameTooLarge("too many valuations");
        finite.push_back(&d);
    }
    if (total == 0)
        return;
    std::vector<uint64_t> sizes;
    for (auto *d : finite)
        sizes.push_back(m.frame(d->sort).size);
    std::vector<uint64_t> at(finite.size(), 0);
    while (true) {
        for (size_t i = 0; i < finite.size(); ++i)
            base.vals[finite[i]->name] = elem_val(finite[i]->sort, at[i]);
        if (!f(base))
            return;
        size_t i = finite.size();
        while (i > 0) {
            --i;
            if (++at[i] < sizes[i])
                break;
            at[i] = 0;
            if (i == 0)
                return;
        }
        if (finite.empty())
            return;
    }
}

Form body_formula(const Structure &m, const Clause &c, const Valuation &v) {
    Valuation w = v;
    return body_rec(m, c.body, w);
}

namespace {

TermP head_term(const Clause &c) { return t_apps(t_pred(c.head), c.head_args); }

} // namespace

bool check_clause(const Structure &m, const Clause &c, const CheckOptions &opt) {
    if (opt.skip_limit && is_limit_clause(m.problem(), c))
        return true;
    bool ok = true;
    TermP head = c.goal ? nullptr : head_term(c);
    for_each_valuation(m, c.vars, opt, [&](const Valuation &v) {
        Form body = body_formula(m, c, v);
        if (is_false(body))
            return true;
        std::vector<Form> cs{domain_of(v), body};
        if (!c.goal)
            cs.push_back(f_not(eval_atom(m, head, v)));
        if (pres::satisfiable(f_and(std::move(cs)))) {
            ok = false;
            return false;
        }
        return true;
    });
    return ok;
}

bool models_definite(const Structure &m, const Problem &p, const CheckOptions &opt) {
    for (auto &c : p.clauses)
        if (!check_clause(m, c, opt))
            return false;
    return true;
}

bool check_model(const Structure &m, const Problem &p, const CheckOptions &opt) {
    if (!models_definite(m, p, opt))
        return false;
    for (auto &g : p.goals)
        if (!check_clause(m, g, opt))
            return false;
    return true;
}

bool body_satisfiable(const Structure &m, const Clause &goal, const CheckOptions &opt) {
    bool found = false;
    for_each_valuation(m, goal.vars, opt, [&](const Valuation &v) {
        Form body = body_formula(m, goal, v);
        if (!is_false(body) && pres::satisfiable(f_and(domain_of(v), body))) {
            found = true;
            return false;
        }
        return true;
    });
    return found;
}

} // namespace lchc
