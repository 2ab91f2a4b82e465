#include "lchc/resolution.hpp"

#include <algorithm>

namespace lchc {

using nlohmann::json;

namespace {

void flatten_goal(const BodyP &b, std::vector<Atom> &atoms, std::vector<VarDecl> &binders) {
    switch (b->k) {
    case Body::K::True: return;
    case Body::K::False: {
        Atom a;
        a.k = Atom::K::Fg;
        a.fg = t_bool(false);
        atoms.push_back(a);
        return;
    }
    case Body::K::AtomK: atoms.push_back(b->atom); return;
    case Body::K::And:
        for (auto &k : b->kids)
            flatten_goal(k, atoms, binders);
        return;
    case Body::K::Exists:
        binders.insert(binders.end(), b->binders.begin(), b->binders.end());
        flatten_goal(b->kids.at(0), atoms, binders);
        return;
    case Body::K::Or: throw std::invalid_argument("disjunctive body; normalize the problem first");
    }
}

void atom_vars(const Atom &a, std::vector<std::string> &out) {
    if (a.fg)
        term_vars(a.fg, out);
    if (a.lhs)
        term_vars(a.lhs, out);
    if (a.rhs)
        term_vars(a.rhs, out);
}

// Drops trivially true atoms and unused variables and renames variables by
// first occurrence.
GoalState canonical(GoalState g) {
    GoalState r = g;
    r.atoms.clear();
    r.from_limit.clear();
    for (size_t i = 0; i < g.atoms.size(); ++i) {
        const Atom &a = g.atoms[i];
        if (a.k == Atom::K::Fg && a.fg->k == Term::K::Bool && a.fg->bval)
            continue;
        r.atoms.push_back(a);
        r.from_limit.push_back(i < g.from_limit.size() && g.from_limit[i]);
    }
    std::vector<std::string> order;
    for (auto &a : r.atoms)
        atom_vars(a, order);
    std::map<std::string, TermP> ren;
    std::map<std::string, SortP> sorts;
    for (auto &v : g.vars)
        sorts[v.name] = v.sort;
    r.vars.clear();
    for (auto &n : order) {
        if (ren.count(n) || !sorts.count(n))
            continue;
        std::string fresh = "_v" + std::to_string(ren.size() + 1);
        ren[n] = t_var(fresh);
        r.vars.push_back({fresh, sorts[n]});
    }
    for (auto &a : r.atoms)
        a = subst_atom(a, ren);
    return r;
}

bool pred_headed(const Atom &a) {
    if (a.k != Atom::K::Fg)
        return false;
    std::vector<TermP> args;
    return spine(a.fg, args)->k == Term::K::Pred;
}

} // namespace

GoalState root_goal(const Problem &p, size_t goal_idx) {
    const Clause &c = p.goals.at(goal_idx);
    GoalState g;
    g.vars = c.vars;
    flatten_goal(c.body, g.atoms, g.vars);
    g.from_limit.assign(g.atoms.size(), false);
    g.root = static_cast<int>(goal_idx);
    return canonical(g);
}

GoalState resolve(const Problem &p, const GoalState &g, size_t atom_idx, size_t def_idx) {
    if (atom_idx >= g.atoms.size() || def_idx >= p.clauses.size())
        throw std::out_of_range("resolution step out of range");
    const Atom &a = g.atoms[atom_idx];
    const Clause &d = p.clauses[def_idx];
    if (a.k != Atom::K::Fg)
        throw HeadMismatch("atom " + std::to_string(atom_idx) + " is not a foreground atom");
    std::vector<TermP> args;
    TermP h = spine(a.fg, args);
    if (h->k != Term::K::Pred || h->name != d.head)
        throw HeadMismatch("atom " + atom_str(a) + " is not headed by " + d.head);
    if (args.size() != d.head_args.size())
        throw ArityMismatch(a.loc, "atom " + atom_str(a) + " has the wrong number of arguments");

    std::vector<Atom> body;
    std::vector<VarDecl> binders;
    flatten_goal(d.body, body, binders);
    std::map<std::string, TermP> sub;
    GoalState r;
    r.vars = g.vars;
    for (auto &v : d.vars) {
        sub[v.name] = t_var("_r" + v.name);
        r.vars.push_back({"_r" + v.name, v.sort});
    }
    for (auto &v : binders) {
        sub[v.name] = t_var("_r" + v.name);
        r.vars.push_back({"_r" + v.name, v.sort});
    }
    for (size_t j = 0; j < d.head_args.size(); ++j) {
        if (d.head_args[j]->k != Term::K::Var)
            throw HeadMismatch("definite clause head argument is not a variable");
        sub[d.head_args[j]->name] = args[j];
    }
    bool limit = is_limit_clause(p, d);
    for (size_t i = 0; i < g.atoms.size(); ++i) {
        if (i != atom_idx) {
            r.atoms.push_back(g.atoms[i]);
            r.from_limit.push_back(i < g.from_limit.size() && g.from_limit[i]);
            continue;
        }
        for (auto &b : body) {
            r.atoms.push_back(subst_atom(b, sub));
            r.from_limit.push_back(limit && b.k == Atom::K::Fg);
        }
    }
    r.depth = g.depth + 1;
    r.atom = static_cast<int>(atom_idx);
    r.definite = static_cast<int>(def_idx);
    return canonical(r);
}

namespace {

std::vector<Atom> background(const GoalState &g) {
    std::vector<Atom> bg;
    for (auto &a : g.atoms)
        if (a.k != Atom::K::Fg)
            bg.push_back(a);
    return bg;
}

} // namespace

bool goal_viable(const Problem &p, const GoalState &g) {
    for (auto &a : g.atoms)
        if (a.k == Atom::K::Fg && a.fg->k == Term::K::Bool && !a.fg->bval)
            return false;
    return exists_sat(background(g), g.vars, p);
}

std::optional<std::string> try_refute(const Problem &p, const GoalState &g) {
    for (auto &a : g.atoms) {
        if (a.k != Atom::K::Fg)
            continue;
        std::vector<TermP> args;
        TermP h = spine(a.fg, args);
        if (h->k != Term::K::Var)
            return std::nullopt;
    }
    auto bg = background(g);
    if (!exists_sat(bg, g.vars, p))
        return std::nullopt;
    if (bg.empty())
        return std::string("true");
    std::string s = "(and";
    for (auto &a : bg)
        s += " " + atom_str(a);
    return s + ")";
}

std::string goal_str(const Problem &p, const GoalState &g) {
    Clause c;
    c.goal = true;
    c.vars = g.vars;
    std::vector<BodyP> ks;
    for (auto &a : g.atoms)
        ks.push_back(b_atom(a));
    c.body = b_and(ks);
    return clause_str(c, p.fin_name);
}

// ---------------------------------------------------------------- traces

json ProofTrace::to_json() const {
    json steps_j = json::array();
    for (auto &s : steps)
        steps_j.push_back(
            {{"goal", s.goal}, {"rule", s.rule}, {"parent", s.parent}, {"atom", s.atom}, {"definite", s.definite}});
    return {{"steps", steps_j}, {"constraints", constraints}};
}

ProofTrace ProofTrace::from_json(const json &j) {
    ProofTrace t;
    for (auto &s : j.at("steps"))
        t.steps.push_back({s.at("goal").get<std::string>(), s.at("rule").get<std::string>(), s.at("parent").get<int>(),
                           s.at("atom").get<int>(), s.at("definite").get<int>()});
    t.constraints = j.at("constraints").get<std::string>();
    return t;
}

bool replay(const Problem &p, const ProofTrace &t) {
    if (t.steps.empty() || t.steps.back().rule != "refutation")
        return false;
    std::vector<GoalState> st;
    try {
        for (size_t i = 0; i < t.steps.size(); ++i) {
            const ProofStep &s = t.steps[i];
            GoalState g;
            if (s.rule == "goal") {
                if (s.parent != -1 || s.definite < 0 || static_cast<size_t>(s.definite) >= p.goals.size())
                    return false;
                g = root_goal(p, static_cast<size_t>(s.definite));
            } else {
                if (s.parent < 0 || static_cast<size_t>(s.parent) >= i)
                    return false;
                const GoalState &par = st[static_cast<size_t>(s.parent)];
                if (s.rule == "resolution") {
                    if (s.atom < 0 || s.definite < 0)
                        return false;
                    g = resolve(p, par, static_cast<size_t>(s.atom), static_cast<size_t>(s.definite));
                } else if (s.rule == "refutation") {
                    if (i + 1 != t.steps.size())
                        return false;
                    auto w = try_refute(p, par);
                    return w && *w == t.constraints && s.goal == goal_str(p, par);
                } else {
                    return false;
                }
            }
            if (goal_str(p, g) != s.goal)
                return false;
            st.push_back(std::move(g));
        }
    } catch (const std::exception &) {
        return false;
    }
    return false;
}

// ---------------------------------------------------------------- search

Refuter::Refuter(std::shared_ptr<const Problem> p, RefuterOptions opt) : p_(std::move(p)), opt_(std::move(opt)) {
    bound_ = opt_.initial_depth;
    restart();
}

int Refuter::selected(const GoalState &g) const {
    for (size_t i = 0; i < g.atoms.size(); ++i)
        if (pred_headed(g.atoms[i]))
            return static_cast<int>(i);
    return -1;
}

bool Refuter::accept(const GoalState &g) {
    ++explored_;
    if (!goal_viable(*p_, g))
        return false;
    if (opt_.prune) {
        Clause c;
        c.goal = true;
        c.vars = g.vars;
        std::vector<BodyP> ks;
        for (auto &a : g.atoms)
            ks.push_back(b_atom(a));
        c.body = b_and(ks);
        try {
            if (!body_satisfiable(*opt_.prune, c))
                return false;
        } catch (const std::exception &) {
            // too large to evaluate: keep the goal
        }
    }
    return true;
}

void Refuter::restart() {
    stack_.clear();
    queue_.clear();
    states_.clear();
    seen_.clear();
    cut_ = false;
    for (size_t i = 0; i < p_->goals.size(); ++i) {
        GoalState g = root_goal(*p_, i);
        if (!accept(g))
            continue;
        if (opt_.breadth_first) {
            if (!seen_.insert(goal_str(*p_, g)).second)
                continue;
            states_.push_back(g);
            queue_.push_back(static_cast<int>(states_.size() - 1));
        } else {
            states_.push_back(g); // roots, consumed in order
        }
    }
    if (!opt_.breadth_first) {
        std::reverse(states_.begin(), states_.end());
        if (!states_.empty()) {
            stack_.push_back({states_.back(), 0, -1});
            states_.pop_back();
        }
    }
}

std::optional<ProofTrace> Refuter::finish(int, const std::string &constraints) {
    ProofTrace t;
    t.constraints = constraints;
    std::vector<const GoalState *> path;
    if (opt_.breadth_first) {
        // states_.back() is the refuted goal; walk the parents
        for (int at = static_cast<int>(states_.size()) - 1; at >= 0;) {
            path.push_back(&states_[static_cast<size_t>(at)]);
            at = states_[static_cast<size_t>(at)].parent;
        }
        std::reverse(path.begin(), path.end());
    } else {
        for (auto &n : stack_)
            path.push_back(&n.g);
    }
    for (size_t i = 0; i < path.size(); ++i) {
        const GoalState &g = *path[i];
        if (i == 0)
            t.steps.push_back({goal_str(*p_, g), "goal", -1, -1, g.root});
        else
            t.steps.push_back({goal_str(*p_, g), "resolution", static_cast<int>(i - 1), g.atom, g.definite});
    }
    t.steps.push_back({t.steps.back().goal, "refutation", static_cast<int>(path.size() - 1), -1, -1});
    found_ = t;
    return t;
}

std::optional<ProofTrace> Refuter::run(uint64_t n) {
    if (found_)
        return found_;
    if (exhausted_)
        return std::nullopt;
    return opt_.breadth_first ? run_bfs(n) : run_guided(n);
}

std::optional<ProofTrace> Refuter::run_bfs(uint64_t n) {
    uint64_t stop = applications_ + n;
    // roots may already be refutable
    for (size_t i = 0; i < states_.size() && applications_ == 0; ++i)
        if (auto w = try_refute(*p_, states_[i])) {
            GoalState g = states_[i];
            states_.push_back(g);
            states_.back().parent = -1;
            return finish(0, *w);
        }
    while (!queue_.empty() && applications_ < stop) {
        int id = queue_.front();
        queue_.pop_front();
        GoalState g = states_[static_cast<size_t>(id)];
        for (size_t ai = 0; ai < g.atoms.size(); ++ai) {
            if (!pred_headed(g.atoms[ai]))
                continue;
            std::vector<TermP> args;
            std::string head = spine(g.atoms[ai].fg, args)->name;
            for (size_t di = 0; di < p_->clauses.size(); ++di) {
                if (p_->clauses[di].head != head)
                    continue;
                ++applications_;
                GoalState c = resolve(*p_, g, ai, di);
                c.parent = id;
                c.root = g.root;
                if (!accept(c) || !seen_.insert(goal_str(*p_, c)).second)
                    continue;
                states_.push_back(c);
                if (auto w = try_refute(*p_, c))
                    return finish(static_cast<int>(states_.size() - 1), *w);
                queue_.push_back(static_cast<int>(states_.size() - 1));
            }
        }
    }
    if (queue_.empty())
        exhausted_ = true;
    return std::nullopt;
}

std::optional<ProofTrace> Refuter::run_guided(uint64_t n) {
    uint64_t stop = applications_ + n;
    while (applications_ < stop) {
        if (stack_.empty()) {
            if (!states_.empty()) {
                stack_.push_back({states_.back(), 0, -1});
                states_.pop_back();
                continue;
            }
            if (!cut_) {
                exhausted_ = true;
                return std::nullopt;
            }
            bound_ *= 2;
            restart();
            continue;
        }
        Node &top = stack_.back();
        int sel = selected(top.g);
        if (sel < 0) {
            if (top.next_def == 0) {
                top.next_def = 1;
                if (auto w = try_refute(*p_, top.g))
                    return finish(-1, *w);
            }
            stack_.pop_back();
            continue;
        }
        std::vector<TermP> args;
        std::string head = spine(top.g.atoms[static_cast<size_t>(sel)].fg, args)->name;
        bool pushed = false;
        while (top.next_def < p_->clauses.size()) {
            size_t di = top.next_def++;
            const Clause &d = p_->clauses[di];
            if (d.head != head)
                continue;
            bool limit = is_limit_clause(*p_, d);
            if (limit && top.g.from_limit[static_cast<size_t>(sel)])
                continue;
            if (top.g.cost + (limit ? opt_.limit_cost : 1) > bound_) {
                cut_ = true;
                continue;
            }
            ++applications_;
            GoalState c = resolve(*p_, top.g, static_cast<size_t>(sel), di);
            c.root = top.g.root;
            c.cost = top.g.cost + (limit ? opt_.limit_cost : 1);
            if (!accept(c)) {
                if (applications_ >= stop)
                    break;
                continue;
            }
            stack_.push_back({std::move(c), 0, -1});
            pushed = true;
            break;
        }
        if (!pushed && !stack_.empty() && &stack_.back() == &top && top.next_def >= p_->clauses.size())
            stack_.pop_back();
    }
    return std::nullopt;
}

SaturationResult saturate(std::shared_ptr<const Problem> p, uint64_t budget) {
    RefuterOptions o;
    o.breadth_first = true;
    Refuter r(std::move(p), o);
    SaturationResult s;
    if (auto t = r.run(budget)) {
        s.refuted = true;
        s.trace = *t;
    }
    s.explored = r.explored();
    return s;
}

} // namespace lchc
