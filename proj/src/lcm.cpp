#include "lchc/lcm.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace lchc {

using nlohmann::json;

LCM LCM::from_json(const json &j) {
    LCM m;
    try {
        m.states = j.at("states").get<std::vector<std::string>>();
        m.initial = j.at("initial").get<std::string>();
        m.final_state = j.value("final", m.initial);
        m.counters = j.at("counters").get<int>();
        for (auto &e : j.at("instructions")) {
            Instr in;
            std::string k = e.at("kind").get<std::string>();
            in.from = e.at("from").get<std::string>();
            in.counter = e.at("counter").get<int>();
            if (k == "A") {
                in.k = Instr::K::A;
                in.to = e.at("to").get<std::string>();
            } else if (k == "B") {
                in.k = Instr::K::B;
                in.if_zero = e.at("ifZero").get<std::string>();
                in.dec = e.at("else").get<std::string>();
            } else {
                throw IllFormedMachine("unknown instruction kind " + k);
            }
            m.instrs.push_back(in);
        }
    } catch (const json::exception &e) {
        throw IllFormedMachine(std::string("malformed machine: ") + e.what());
    }
    m.check();
    return m;
}

json LCM::to_json() const {
    json is = json::array();
    for (auto &in : instrs) {
        if (in.k == Instr::K::A)
            is.push_back({{"kind", "A"}, {"from", in.from}, {"counter", in.counter}, {"to", in.to}});
        else
            is.push_back({{"kind", "B"}, {"from", in.from}, {"counter", in.counter}, {"ifZero", in.if_zero},
                          {"else", in.dec}});
    }
    return {{"states", states}, {"initial", initial}, {"final", final_state}, {"counters", counters},
            {"instructions", is}};
}

void LCM::check() const {
    std::set<std::string> qs(states.begin(), states.end());
    if (qs.size() != states.size())
        throw IllFormedMachine("duplicate state");
    if (counters < 1)
        throw IllFormedMachine("a machine needs at least one counter");
    auto known = [&](const std::string &q) {
        if (!qs.count(q))
            throw IllFormedMachine("undeclared state " + q);
        for (char c : q)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
                throw IllFormedMachine("state names must be alphanumeric: " + q);
    };
    known(initial);
    known(final_state);
    for (auto &in : instrs) {
        known(in.from);
        if (in.k == Instr::K::A) {
            known(in.to);
        } else {
            known(in.if_zero);
            known(in.dec);
        }
        if (in.counter < 1 || in.counter > counters)
            throw IllFormedMachine("counter index " + std::to_string(in.counter) + " out of range");
    }
}

LCMConfig LCMConfig::parse(const std::string &s) {
    LCMConfig c;
    std::stringstream ss(s);
    std::string part;
    if (!std::getline(ss, part, ',') || part.empty())
        throw IllFormedMachine("target needs a state");
    c.state = part;
    while (std::getline(ss, part, ',')) {
        try {
            size_t used = 0;
            long long v = std::stoll(part, &used);
            if (used != part.size() || v < 0)
                throw IllFormedMachine("bad counter value " + part);
            c.values.push_back(uint64_t(v));
        } catch (const std::logic_error &) {
            throw IllFormedMachine("bad counter value " + part);
        }
    }
    return c;
}

std::string lcm_pred(const std::string &state) { return "R_" + state; }

namespace {

std::string comp(const std::string &v, int i) { return "(comp " + v + " " + std::to_string(i) + ")"; }

// x_j = y_j for every j except skip
std::string frame_eqs(int n, int skip) {
    std::string s;
    for (int j = 1; j <= n; ++j)
        if (j != skip)
            s += " (eq " + comp("x", j) + " " + comp("y", j) + ")";
    return s;
}

} // namespace

Problem encode_lcm(const LCM &m, const LCMConfig &target, bool cover) {
    m.check();
    if (std::find(m.states.begin(), m.states.end(), target.state) == m.states.end())
        throw IllFormedMachine("undeclared target state " + target.state);
    if (target.values.size() != size_t(m.counters))
        throw IllFormedMachine("target has " + std::to_string(target.values.size()) + " values for " +
                               std::to_string(m.counters) + " counters");
    int n = m.counters;
    std::ostringstream o;
    o << "(theory (nat " << n << "))\n(direction downward)\n";
    for (auto &q : m.states)
        o << "(declare " << lcm_pred(q) << " (-> W o))\n";
    o << "(clause ((x W)) (head (" << lcm_pred(m.initial) << " x)) (body (and";
    for (int i = 1; i <= n; ++i)
        o << " (eq " << comp("x", i) << " 0)";
    o << ")))\n";
    for (auto &in : m.instrs) {
        int i = in.counter;
        std::string from = lcm_pred(in.from);
        if (in.k == LCM::Instr::K::A) {
            o << "(clause ((x W) (y W)) (head (" << lcm_pred(in.to) << " x)) (body (and (" << from << " y) (eq "
              << comp("x", i) << " (+ " << comp("y", i) << " 1))" << frame_eqs(n, i) << ")))\n";
        } else {
            o << "(clause ((x W)) (head (" << lcm_pred(in.if_zero) << " x)) (body (and (" << from << " x) (eq "
              << comp("x", i) << " 0))))\n";
            o << "(clause ((x W) (y W)) (head (" << lcm_pred(in.dec) << " x)) (body (and (" << from << " y) (eq "
              << comp("y", i) << " (+ " << comp("x", i) << " 1))" << frame_eqs(n, i) << ")))\n";
        }
    }
    o << "(goal ((x W)) (body (and (" << lcm_pred(target.state) << " x)";
    for (int i = 1; i <= n; ++i)
        o << " (" << (cover ? "geq " : "eq ") << comp("x", i) << " " << target.values[i - 1] << ")";
    o << ")))\n";
    Problem p = parse_problem(o.str());
    for (auto &q : m.states)
        p.clauses.push_back(make_limit_clause(p, lcm_pred(q)));
    return p;
}

bool simulate_reachable(const LCM &m, const LCMConfig &target, uint64_t cap) {
    using Conf = std::pair<std::string, std::vector<uint64_t>>;
    std::set<Conf> seen;
    std::deque<Conf> todo;
    auto push = [&](Conf c) {
        for (auto v : c.second)
            if (v > cap)
                return;
        if (seen.insert(c).second)
            todo.push_back(std::move(c));
    };
    push({m.initial, std::vector<uint64_t>(m.counters, 0)});
    while (!todo.empty()) {
        Conf c = todo.front();
        todo.pop_front();
        if (c.first == target.state && c.second == target.values)
            return true;
        // a single unit loss; iterating it gives every loss
        for (size_t j = 0; j < c.second.size(); ++j)
            if (c.second[j] > 0) {
                Conf d = c;
                --d.second[j];
                push(d);
            }
        for (auto &in : m.instrs) {
            if (in.from != c.first)
                continue;
            size_t j = size_t(in.counter - 1);
            Conf d = c;
            if (in.k == LCM::Instr::K::A) {
                d.first = in.to;
                ++d.second[j];
            } else if (c.second[j] == 0) {
                d.first = in.if_zero;
            } else {
                d.first = in.dec;
                --d.second[j];
            }
            push(d);
        }
    }
    return false;
}

} // namespace lchc
