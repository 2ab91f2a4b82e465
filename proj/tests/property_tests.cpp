#include "lchc/driver.hpp"
#include "lchc/lcm.hpp"
#include "qe_sampling.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace lchc;
namespace fs = std::filesystem;

namespace {

std::vector<fs::path> corpus() {
    std::vector<fs::path> r;
    for (auto dir : {fs::path(LCHC_FIXTURES), fs::path(LCHC_FIXTURES) / "lcm"})
        for (auto &e : fs::directory_iterator(dir))
            if (e.path().extension() == ".lchc")
                r.push_back(e.path());
    std::sort(r.begin(), r.end());
    return r;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<TheoryHandle> theories() {
    std::vector<TheoryHandle> r;
    for (auto dir : {Direction::Upward, Direction::Downward}) {
        r.emplace_back(Theory::LIA, 1, dir);
        r.emplace_back(Theory::Nat, 1, dir);
        r.emplace_back(Theory::Nat, 2, dir);
        r.emplace_back(Theory::Nat, 3, dir);
    }
    return r;
}

WElem random_point(const TheoryHandle &th, std::mt19937 &rng) {
    WElem w;
    int lo = th.nat() ? 0 : -12;
    for (int i = 0; i < th.dim(); ++i)
        w.push_back(std::uniform_int_distribution<int>(lo, 12)(rng));
    return w;
}

Upset random_upset(const TheoryHandle &th, std::mt19937 &rng) {
    if (!th.nat() || std::uniform_int_distribution<int>(0, 1)(rng))
        return th.enumerate(std::uniform_int_distribution<size_t>(0, 400)(rng));
    Upset u;
    u.k = Upset::K::Antichain;
    int n = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int i = 0; i < n; ++i) {
        WElem w = random_point(th, rng);
        if (th.down())
            for (auto &c : w)
                if (std::uniform_int_distribution<int>(0, 5)(rng) == 0)
                    c = omega();
        u.elems.push_back(w);
    }
    return u;
}

} // namespace

TEST(Property, UpsetFormulaAgreement) {
    std::mt19937 rng(7);
    int samples = 0;
    for (auto &th : theories())
        for (int i = 0; i < 60; ++i) {
            Upset u = th.canonicalize(random_upset(th, rng));
            for (int j = 0; j < 5; ++j, ++samples) {
                WElem w = random_point(th, rng);
                bool direct = th.member(w, u);
                bool formula = pres::decide(th.to_formula(u, th.constant(w)));
                ASSERT_EQ(direct, formula) << th.str(u);
            }
        }
    EXPECT_GE(samples, 1000);
}

TEST(Property, AntichainCanonicalizationIdempotent) {
    std::mt19937 rng(11);
    for (auto &th : theories())
        for (int i = 0; i < 200; ++i) {
            Upset raw = random_upset(th, rng);
            Upset u = th.canonicalize(raw);
            EXPECT_EQ(th.canonicalize(u), u) << th.str(u);
            for (int j = 0; j < 5; ++j) {
                WElem w = random_point(th, rng);
                EXPECT_EQ(th.member(w, raw), th.member(w, u));
            }
            if (u.k == Upset::K::Antichain)
                for (size_t a = 0; a < u.elems.size(); ++a)
                    for (size_t b = 0; b < u.elems.size(); ++b)
                        if (a != b)
                            EXPECT_FALSE(u.elems[a] == u.elems[b]);
        }
}

TEST(Property, JoinIsUnion) {
    std::mt19937 rng(13);
    for (auto &th : theories())
        for (int i = 0; i < 100; ++i) {
            Upset a = th.canonicalize(random_upset(th, rng)), b = th.canonicalize(random_upset(th, rng));
            Upset j = th.join(a, b);
            EXPECT_TRUE(th.subset(a, j));
            EXPECT_TRUE(th.subset(b, j));
            for (int k = 0; k < 5; ++k) {
                WElem w = random_point(th, rng);
                EXPECT_EQ(th.member(w, j), th.member(w, a) || th.member(w, b));
            }
        }
}

TEST(Property, ParserRoundTrip) {
    for (auto &f : corpus()) {
        Problem p = parse_problem(slurp(f));
        Problem q = parse_problem(print_problem(p));
        EXPECT_TRUE(problem_eq(p, q)) << f;
        Problem n = normalize_problem(p);
        EXPECT_TRUE(problem_eq(n, parse_problem(print_problem(n)))) << f;
    }
}

TEST(Property, QuantifierEliminationSampling) {
    auto r = qe_sampling::run(60, 100, 2024);
    EXPECT_EQ(r.samples, 6000);
    EXPECT_EQ(r.mismatches, 0) << r.first_mismatch;
}

TEST(Property, TraceReplay) {
    std::mt19937 rng(3);
    int refuted = 0;
    for (auto &f : corpus()) {
        auto p = prepare(slurp(f));
        if (!validate(*p).ok())
            continue;
        auto t = Refuter(p).run(500);
        if (!t)
            continue;
        ++refuted;
        ASSERT_TRUE(replay(*p, *t)) << f;
        ProofTrace back = ProofTrace::from_json(t->to_json());
        EXPECT_TRUE(replay(*p, back)) << f;
        for (int i = 0; i < 5; ++i) {
            ProofTrace m = *t;
            size_t s = std::uniform_int_distribution<size_t>(0, m.steps.size() - 1)(rng);
            switch (i % 3) {
            case 0: m.steps[s].goal += " "; break;
            case 1: m.steps[s].parent = static_cast<int>(s); break;
            default: m.constraints = "(and (lt 0 0))";
            }
            EXPECT_FALSE(replay(*p, m)) << f << " mutation " << i;
        }
    }
    EXPECT_GE(refuted, 15);
}

TEST(Property, ActiveInterpretationsAreMonotone) {
    std::mt19937 rng(5);
    int checked = 0;
    for (auto &f : corpus()) {
        auto p = prepare(slurp(f));
        if (!validate(*p).ok())
            continue;
        std::vector<Structure> ms;
        try {
            if (auto m = kleene_candidate(p))
                ms.push_back(*m);
            StructureEnumerator en(p);
            for (int i = 0; i < 40; ++i)
                if (auto m = en.next())
                    ms.push_back(*m);
        } catch (const FrameTooLarge &) {
        }
        for (auto &m : ms) {
            const TheoryHandle &th = m.theory();
            for (auto &pi : m.preds()) {
                if (!pi.active || m.table(pi.name).lambda)
                    continue;
                for (auto &[k, u] : m.table(pi.name).rows) {
                    for (int j = 0; j < 8; ++j) {
                        WElem a = random_point(th, rng), b = a;
                        for (auto &c : b)
                            c += std::uniform_int_distribution<int>(0, 4)(rng);
                        // a <= b in the order of W
                        if (th.down())
                            EXPECT_TRUE(!th.member(b, u) || th.member(a, u)) << f << " " << pi.name;
                        else
                            EXPECT_TRUE(!th.member(a, u) || th.member(b, u)) << f << " " << pi.name;
                        ++checked;
                    }
                }
            }
            CheckOptions o;
            o.skip_limit = false;
            for (auto &c : p->clauses)
                if (is_limit_clause(*p, c))
                    EXPECT_TRUE(check_clause(m, c, o)) << f << " " << c.head;
        }
    }
    EXPECT_GE(checked, 1000);
}

TEST(Property, LossyMonotonicity) {
    std::ifstream in(fs::path(LCHC_FIXTURES) / "lcm" / "loop.json");
    LCM m = LCM::from_json(nlohmann::json::parse(in));
    for (auto &q : m.states)
        for (uint64_t v = 0; v <= 8; ++v)
            if (simulate_reachable(m, {q, {v}}, 10))
                for (uint64_t w = 0; w <= v; ++w)
                    EXPECT_TRUE(simulate_reachable(m, {q, {w}}, 10));
}
