#include "lchc/entwined.hpp"

#include <algorithm>

namespace lchc {

using pres::f_and;
using pres::f_not;
using pres::Form;

namespace {

bool is_false(const Form &f) { return f->kind == pres::Formula::Kind::False; }

std::vector<uint64_t> split_key(const std::vector<const Frame *> &fs, uint64_t key) {
    std::vector<uint64_t> r(fs.size());
    for (size_t i = fs.size(); i-- > 0;) {
        r[i] = key % fs[i]->size;
        key /= fs[i]->size;
    }
    return r;
}

uint64_t join_key(const std::vector<const Frame *> &fs, const std::vector<uint64_t> &xs) {
    uint64_t k = 0;
    for (size_t i = 0; i < xs.size(); ++i)
        k = k * fs[i]->size + xs[i];
    return k;
}

SortP rest_sort(const std::vector<SortP> &args, size_t from) {
    return s_arrows(std::vector<SortP>(args.begin() + static_cast<long>(from), args.end()), s_prop());
}

} // namespace

/// Moves a frame element between two structures of the same problem by its
/// canonical construction. Function-like elements are transported pointwise,
/// which needs the opposite direction for their arguments.
uint64_t translate_elem(const Structure &src, const Structure &dst, const SortP &s, uint64_t e) {
    const Frame &fs = src.frame(s);
    switch (fs.k) {
    case Frame::K::Bool:
    case Frame::K::Fin: return e;
    case Frame::K::CaseII: {
        if (e == 0)
            return 0;
        const Frame &fd = dst.frame(s);
        auto [pred, pk] = fs.first_alias.at(e);
        const PredInfo &pi = src.pred(pred);
        std::vector<const Frame *> sp, dp;
        for (size_t i = 0; i < pi.wpos; ++i) {
            sp.push_back(&src.frame(pi.args[i]));
            dp.push_back(&dst.frame(pi.args[i]));
        }
        auto xs = split_key(sp, pk);
        for (size_t i = 0; i < xs.size(); ++i)
            xs[i] = translate_elem(src, dst, pi.args[i], xs[i]);
        auto it = fd.alias.find({pred, join_key(dp, xs)});
        if (it == fd.alias.end())
            throw FrameInconsistency("partial application missing from a frame");
        return it->second;
    }
    case Frame::K::Fun:
    case Frame::K::Inactive: {
        const Frame &fd = dst.frame(s);
        if (fd.huge || fs.huge)
            throw FrameTooLarge("cannot transport an element of a large frame");
        auto args = sort_args(s);
        std::vector<SortP> asorts(args.begin(), args.begin() + static_cast<long>(fd.args.size()));
        uint64_t r = 0, place = 1;
        for (uint64_t k = 0; k < fd.keys; ++k) {
            auto xs = split_key(fd.args, k);
            for (size_t i = 0; i < xs.size(); ++i)
                xs[i] = translate_elem(dst, src, asorts[i], xs[i]);
            uint64_t d = fs.digit(e, join_key(fs.args, xs));
            if (fs.k == Frame::K::Inactive) {
                r |= d << k;
            } else {
                SortP tgt = rest_sort(args, fd.args.size());
                r += translate_elem(src, dst, tgt, d) * place;
                place *= fd.target->size;
            }
        }
        return r;
    }
    }
    return e;
}

namespace {

// Head of a definite clause under a valuation: table key and W components.
struct HeadInst {
    uint64_t key = 0;
    std::vector<LinTerm> w;
};

HeadInst head_inst(const Structure &m, const Clause &c, const Valuation &v) {
    const PredInfo &pi = m.pred(c.head);
    HeadInst h;
    std::vector<uint64_t> xs;
    for (size_t i = 0; i < c.head_args.size(); ++i) {
        if (pi.active && i == pi.wpos) {
            h.w = compile_term(c.head_args[i], v.wenv, m.theory());
            continue;
        }
        auto bs = eval_branches(m, c.head_args[i], v);
        if (bs.size() != 1 || (bs[0].v.k != Val::K::Elem && bs[0].v.k != Val::K::Prop))
            throw std::logic_error("head argument is not a frame element");
        const Val &x = bs[0].v;
        xs.push_back(x.k == Val::K::Prop ? (x.prop->kind == pres::Formula::Kind::True ? 1 : 0) : x.idx);
    }
    h.key = m.encode_key(c.head, xs);
    return h;
}

struct Image {
    std::map<std::string, std::map<uint64_t, Upset>> rows;
    std::map<std::string, std::set<uint64_t>> trues;
};

// One application of the immediate consequence map; false when nothing new.
bool grow(const Structure &cur, const Problem &p, const CheckOptions &opt, Image &img) {
    const TheoryHandle &th = cur.theory();
    bool grew = false;
    for (auto &c : p.clauses) {
        if (is_limit_clause(p, c))
            continue;
        const PredInfo &pi = cur.pred(c.head);
        for_each_valuation(cur, c.vars, opt, [&](const Valuation &v) {
            Form body = body_formula(cur, c, v);
            if (is_false(body))
                return true;
            Form phi = f_and(f_and(v.domain), body);
            HeadInst h = head_inst(cur, c, v);
            if (!pi.active) {
                if (cur.truth(c.head, h.key) || img.trues[c.head].count(h.key))
                    return true;
                if (pres::satisfiable(phi)) {
                    img.trues[c.head].insert(h.key);
                    grew = true;
                }
                return true;
            }
            Upset have = th.join(cur.row(c.head, h.key), img.rows[c.head][h.key]);
            if (!pres::satisfiable(f_and(phi, f_not(th.to_formula(have, h.w)))))
                return true;
            std::vector<VarId> ids;
            auto ys = fresh_components("h", static_cast<int>(h.w.size()), &ids);
            std::vector<Form> cs{phi};
            for (size_t i = 0; i < ys.size(); ++i)
                cs.push_back(pres::f_atom(pres::Rel::Eq, ys[i], h.w[i]));
            Upset add = th.closure_of(f_and(std::move(cs)), ids);
            img.rows[c.head][h.key] = th.join(img.rows[c.head][h.key], add);
            grew = true;
            return true;
        });
    }
    return grew;
}

Upset widen(const TheoryHandle &th, const Upset &old, const Upset &nu) {
    if (old.k == Upset::K::Empty || nu == old)
        return nu;
    if (!th.nat())
        return th.all();
    if (nu.k != Upset::K::Antichain || old.k != Upset::K::Antichain)
        return nu;
    size_t d = static_cast<size_t>(th.dim());
    Upset r = nu;
    if (th.down()) {
        // components above every old generator become omega
        std::vector<Int> hi(d, Int(0));
        std::vector<bool> inf(d, false);
        for (auto &g : old.elems)
            for (size_t i = 0; i < d; ++i) {
                if (g[i] == omega())
                    inf[i] = true;
                else if (g[i] > hi[i])
                    hi[i] = g[i];
            }
        for (auto &g : r.elems)
            for (size_t i = 0; i < d; ++i)
                if (!inf[i] && g[i] != omega() && g[i] > hi[i])
                    g[i] = omega();
    } else {
        std::vector<Int> lo = old.elems[0];
        for (auto &g : old.elems)
            for (size_t i = 0; i < d; ++i)
                lo[i] = std::min(lo[i], g[i]);
        for (auto &g : r.elems)
            for (size_t i = 0; i < d; ++i)
                if (g[i] < lo[i])
                    g[i] = 0;
    }
    return th.canonicalize(r);
}

// Next structure: current tables joined with the image, stage by stage.
Structure advance(const Structure &cur, const Image &img, bool widening) {
    Structure nxt(cur.problem_ptr());
    const TheoryHandle &th = cur.theory();
    std::vector<const PredInfo *> order;
    for (auto &pi : cur.preds())
        order.push_back(&pi);
    std::stable_sort(order.begin(), order.end(), [](auto *a, auto *b) { return a->order < b->order; });
    size_t at = 0;
    while (at < order.size()) {
        int k = order[at]->order;
        size_t end = at;
        while (end < order.size() && order[end]->order == k)
            ++end;
        // keys of this stage only depend on frames of lower order
        std::vector<std::pair<std::string, std::pair<uint64_t, Upset>>> rows;
        std::vector<std::pair<std::string, uint64_t>> trues;
        for (size_t i = at; i < end; ++i) {
            const PredInfo &pi = *order[i];
            uint64_t n = nxt.key_space(pi.name);
            std::vector<const Frame *> nf, cf;
            for (auto &s : pi.key_sorts) {
                nf.push_back(&nxt.frame(s));
                cf.push_back(&cur.frame(s));
            }
            auto ri = img.rows.find(pi.name);
            auto ti = img.trues.find(pi.name);
            for (uint64_t key = 0; key < n; ++key) {
                auto xs = split_key(nf, key);
                for (size_t j = 0; j < xs.size(); ++j)
                    xs[j] = translate_elem(nxt, cur, pi.key_sorts[j], xs[j]);
                uint64_t ck = join_key(cf, xs);
                if (pi.active) {
                    Upset old = cur.row(pi.name, ck), u = old;
                    if (ri != img.rows.end()) {
                        auto it = ri->second.find(ck);
                        if (it != ri->second.end())
                            u = th.join(u, it->second);
                    }
                    if (widening)
                        u = widen(th, old, u);
                    if (u.k != Upset::K::Empty)
                        rows.push_back({pi.name, {key, u}});
                } else if (cur.truth(pi.name, ck) || (ti != img.trues.end() && ti->second.count(ck))) {
                    trues.push_back({pi.name, key});
                }
            }
        }
        for (auto &[n, r] : rows)
            nxt.set_row(n, r.first, r.second);
        for (auto &[n, key] : trues)
            nxt.set_truth(n, key, true);
        at = end;
    }
    return nxt;
}

} // namespace

std::optional<Structure> kleene_candidate(std::shared_ptr<const Problem> p, KleeneInfo *info,
                                          const KleeneOptions &opt) {
    KleeneInfo local;
    KleeneInfo &in = info ? *info : local;
    in = KleeneInfo{};
    try {
        Structure cur(p);
        for (int it = 0; it < opt.max_iterations; ++it) {
            in.iterations = it + 1;
            Image img;
            if (!grow(cur, *p, opt.check, img)) {
                in.converged = true;
                in.models_definite = true;
                bool goals = true;
                for (auto &g : p->goals)
                    goals = goals && check_clause(cur, g, opt.check);
                in.models_all = goals;
                return cur;
            }
            bool widening = it + 1 >= opt.widen_after;
            in.widened = in.widened || widening;
            cur = advance(cur, img, widening);
        }
    } catch (const FrameTooLarge &) {
        return std::nullopt;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- enumeration

StructureEnumerator::StructureEnumerator(std::shared_ptr<const Problem> p) : p_(std::move(p)) {}

namespace {

constexpr size_t kChunk = 256;

struct ShellGen {
    uint64_t shell;
    uint64_t skip;
    size_t want;
    uint64_t seen = 0;
    std::vector<Structure> out;
    std::vector<std::vector<const PredInfo *>> stages;

    // false once enough structures are collected
    bool stage(size_t si, Structure m, bool hit) {
        if (si == stages.size()) {
            if (!hit)
                return true;
            if (seen++ >= skip)
                out.push_back(m);
            return out.size() < want;
        }
        std::vector<std::pair<const PredInfo *, uint64_t>> slots;
        for (auto *pi : stages[si]) {
            uint64_t n = m.key_space(pi->name);
            if (n > kFrameCap)
                throw FrameTooLarge("too many rows to enumerate");
            for (uint64_t k = 0; k < n; ++k)
                slots.push_back({pi, k});
        }
        std::vector<uint64_t> choice(slots.size(), 0);
        auto limit = [&](size_t i) { return slots[i].first->active ? shell : std::min<uint64_t>(shell, 1); };
        while (true) {
            Structure n = m;
            bool h = hit;
            for (size_t i = 0; i < slots.size(); ++i) {
                auto *pi = slots[i].first;
                h = h || choice[i] == shell;
                if (pi->active)
                    n.set_row(pi->name, slots[i].second, n.theory().enumerate(choice[i]));
                else if (choice[i] == 1)
                    n.set_truth(pi->name, slots[i].second, true);
            }
            if (!stage(si + 1, n, h))
                return false;
            size_t i = 0;
            while (i < slots.size()) {
                if (++choice[i] <= limit(i))
                    break;
                choice[i] = 0;
                ++i;
            }
            if (i == slots.size())
                return true;
        }
    }
};

} // namespace

void StructureEnumerator::fill() {
    buffer_.clear();
    buf_at_ = 0;
    while (buffer_.empty() && !exhausted_) {
        Structure empty(p_);
        ShellGen g{shell_, pos_, kChunk, 0, {}, {}};
        std::map<int, std::vector<const PredInfo *>> by;
        for (auto &pi : empty.preds())
            by[pi.order].push_back(&pi);
        for (auto &[k, v] : by)
            g.stages.push_back(v);
        bool any_active = false;
        for (auto &pi : empty.preds())
            any_active |= pi.active;
        bool done = g.stage(0, empty, shell_ == 0);
        buffer_ = std::move(g.out);
        if (done) {
            if (buffer_.empty() && shell_ >= 2 && !any_active)
                exhausted_ = true;
            ++shell_;
            pos_ = 0;
        } else {
            pos_ += buffer_.size();
        }
    }
}

std::optional<Structure> StructureEnumerator::next() {
    if (buf_at_ >= buffer_.size())
        fill();
    if (buf_at_ >= buffer_.size())
        return std::nullopt;
    ++produced_;
    return buffer_[buf_at_++];
}

// ---------------------------------------------------------------- oracle

namespace {

struct FlatBody {
    std::vector<Atom> atoms;
    std::vector<VarDecl> extra;
};

void flatten_body(const BodyP &b, FlatBody &out) {
    switch (b->k) {
    case Body::K::True: return;
    case Body::K::False: {
        Atom a;
        a.k = Atom::K::Bg;
        a.rel = pres::Rel::Lt;
        a.lhs = t_wlit({Int(0)}, false);
        a.rhs = t_wlit({Int(0)}, false);
        out.atoms.push_back(a);
        return;
    }
    case Body::K::AtomK: out.atoms.push_back(b->atom); return;
    case Body::K::And:
        for (auto &k : b->kids)
            flatten_body(k, out);
        return;
    case Body::K::Exists:
        out.extra.insert(out.extra.end(), b->binders.begin(), b->binders.end());
        flatten_body(b->kids.at(0), out);
        return;
    case Body::K::Or: throw std::invalid_argument("disjunctive body reached the oracle");
    }
}

using Fact = std::pair<std::vector<uint64_t>, WElem>;

struct Oracle {
    const Problem &p;
    TheoryHandle th;
    int B;
    std::map<std::string, std::set<Fact>> facts;

    Oracle(const Problem &p, int B) : p(p), th(p), B(B) {}

    Int lo() const { return th.nat() ? Int(0) : Int(-B); }

    bool in_box(const WElem &w) const {
        for (auto &x : w)
            if (x < lo() || x > B)
                return false;
        return true;
    }

    struct Env {
        std::map<std::string, uint64_t> fin;
        std::map<std::string, WElem> w;
    };

    WEnv wenv(const Env &e) const {
        WEnv r;
        for (auto &[n, v] : e.w) {
            std::vector<LinTerm> cs;
            for (auto &x : v)
                cs.push_back(LinTerm(x));
            r[n] = cs;
        }
        return r;
    }

    std::optional<uint64_t> fin_val(const TermP &t, const Env &e) const {
        if (t->k == Term::K::SConst)
            return static_cast<uint64_t>(p.fin_index(t->name));
        if (t->k == Term::K::Var) {
            auto it = e.fin.find(t->name);
            if (it != e.fin.end())
                return it->second;
        }
        return std::nullopt;
    }

    std::optional<WElem> w_value(const TermP &t, const Env &e) const {
        try {
            auto cs = compile_term(t, wenv(e), th);
            WElem r;
            for (auto &c : cs) {
                if (!c.is_constant())
                    return std::nullopt;
                r.push_back(c.constant());
            }
            return r;
        } catch (const IllSortedAtom &) {
            return std::nullopt;
        }
    }

    bool holds(const Atom &a, const Env &e) const {
        if (a.k == Atom::K::Eqs)
            return fin_val(a.lhs, e) == fin_val(a.rhs, e);
        Form f = compile_atom(a, wenv(e), th);
        return pres::evaluate(f, {});
    }

    bool is_w(const SortP &s) const { return s->k == Sort::K::W || s->k == Sort::K::Num; }

    // Enumerates all satisfying environments of a body.
    void solve(const std::vector<VarDecl> &vars, const FlatBody &fb, const std::function<void(const Env &)> &k) {
        std::vector<const Atom *> fg, rest;
        for (auto &a : fb.atoms)
            (a.k == Atom::K::Fg ? fg : rest).push_back(&a);
        std::vector<VarDecl> all = vars;
        all.insert(all.end(), fb.extra.begin(), fb.extra.end());
        std::function<void(size_t, Env)> match = [&](size_t i, Env e) {
            if (i == fg.size()) {
                ground(all, 0, e, rest, k);
                return;
            }
            std::vector<TermP> args;
            TermP h = spine(fg[i]->fg, args);
            if (h->k != Term::K::Pred)
                throw std::invalid_argument("oracle needs first-order atoms");
            auto wp = w_position(p.decl(h->name));
            for (auto &f : facts[h->name]) {
                Env e2 = e;
                bool ok = true;
                size_t fi = 0;
                for (size_t j = 0; j < args.size() && ok; ++j) {
                    const TermP &a = args[j];
                    if (wp && j == *wp) {
                        if (a->k == Term::K::Var && !e2.w.count(a->name)) {
                            e2.w[a->name] = f.second;
                        } else {
                            auto v = w_value(a, e2);
                            ok = v && *v == f.second;
                        }
                    } else {
                        uint64_t want = f.first[fi++];
                        if (a->k == Term::K::Var && !e2.fin.count(a->name)) {
                            e2.fin[a->name] = want;
                        } else {
                            auto v = fin_val(a, e2);
                            ok = v && *v == want;
                        }
                    }
                }
                if (ok)
                    match(i + 1, e2);
            }
        };
        match(0, Env{});
    }

    void ground(const std::vector<VarDecl> &vars, size_t i, Env &e, const std::vector<const Atom *> &atoms,
                const std::function<void(const Env &)> &k) {
        if (i == vars.size()) {
            for (auto *a : atoms)
                if (!holds(*a, e))
                    return;
            k(e);
            return;
        }
        const VarDecl &d = vars[i];
        if (is_w(d.sort)) {
            if (e.w.count(d.name))
                return ground(vars, i + 1, e, atoms, k);
            size_t n = d.sort->k == Sort::K::W ? static_cast<size_t>(p.dim) : 1;
            WElem w(n, lo());
            while (true) {
                e.w[d.name] = w;
                ground(vars, i + 1, e, atoms, k);
                size_t j = 0;
                while (j < n && ++w[j] > B)
                    w[j++] = lo();
                if (j == n)
                    break;
            }
            e.w.erase(d.name);
            return;
        }
        if (d.sort->k != Sort::K::Fin)
            throw std::invalid_argument("oracle needs a first-order problem");
        if (e.fin.count(d.name))
            return ground(vars, i + 1, e, atoms, k);
        for (uint64_t c = 0; c < p.fin_elems.size(); ++c) {
            e.fin[d.name] = c;
            ground(vars, i + 1, e, atoms, k);
        }
        e.fin.erase(d.name);
    }

    // closes a set of facts in the working direction inside the box
    void close(const std::string &pred) {
        auto wp = w_position(p.decl(pred));
        if (!wp)
            return;
        std::set<Fact> add;
        for (auto &f : facts[pred]) {
            size_t n = f.second.size();
            WElem w(n);
            // iterate the box and keep the comparable side
            std::vector<Int> from(n), to(n);
            for (size_t i = 0; i < n; ++i) {
                from[i] = th.down() ? lo() : f.second[i];
                to[i] = th.down() ? f.second[i] : Int(B);
            }
            w = from;
            while (true) {
                add.insert({f.first, w});
                size_t j = 0;
                while (j < n && ++w[j] > to[j]) {
                    w[j] = from[j];
                    ++j;
                }
                if (j == n)
                    break;
            }
        }
        facts[pred].insert(add.begin(), add.end());
    }
};

} // namespace

WindowModel bounded_canonical_model(const Problem &p, int window) {
    Oracle o(p, window);
    std::vector<std::pair<const Clause *, FlatBody>> cls;
    for (auto &c : p.clauses) {
        if (is_limit_clause(p, c))
            continue;
        FlatBody fb;
        flatten_body(c.body, fb);
        cls.push_back({&c, fb});
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto &[c, fb] : cls) {
            auto wp = w_position(p.decl(c->head));
            std::vector<Fact> derived;
            o.solve(c->vars, fb, [&](const Oracle::Env &e) {
                Fact f;
                for (size_t j = 0; j < c->head_args.size(); ++j) {
                    if (wp && j == *wp) {
                        auto v = o.w_value(c->head_args[j], e);
                        if (!v)
                            throw std::invalid_argument("unbound head variable in the oracle");
                        f.second = *v;
                    } else {
                        auto v = o.fin_val(c->head_args[j], e);
                        if (!v)
                            throw std::invalid_argument("unbound head variable in the oracle");
                        f.first.push_back(*v);
                    }
                }
                if (wp && !o.in_box(f.second))
                    return;
                derived.push_back(f);
            });
            auto &set = o.facts[c->head];
            size_t before = set.size();
            set.insert(derived.begin(), derived.end());
            o.close(c->head);
            changed = changed || set.size() != before;
        }
    }
    WindowModel r;
    r.window = window;
    r.facts = o.facts;
    for (auto &g : p.goals) {
        FlatBody fb;
        flatten_body(g.body, fb);
        o.solve(g.vars, fb, [&](const Oracle::Env &) { r.goal_violated = true; });
    }
    return r;
}

} // namespace lchc
