#include "lchc/background.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace lchc;
using namespace lchc::pres;

namespace {

TheoryHandle lia_up() { return TheoryHandle(Theory::LIA, 1, Direction::Upward); }
TheoryHandle nat2_up() { return TheoryHandle(Theory::Nat, 2, Direction::Upward); }
TheoryHandle nat2_down() { return TheoryHandle(Theory::Nat, 2, Direction::Downward); }

Upset bound(long k) {
    Upset u;
    u.k = Upset::K::Bound;
    u.bound = k;
    return u;
}

Upset anti(std::vector<WElem> e) {
    Upset u;
    u.k = Upset::K::Antichain;
    u.elems = std::move(e);
    return u;
}

} // namespace

TEST(Background, Membership) {
    auto th = lia_up();
    EXPECT_TRUE(th.member({5}, bound(5)));
    EXPECT_FALSE(th.member({4}, bound(5)));
    auto n = nat2_up();
    Upset u = n.canonicalize(anti({{0, 127}, {1, 63}}));
    EXPECT_TRUE(n.member({1, 70}, u));
    EXPECT_FALSE(n.member({0, 100}, u));
}

TEST(Background, Formula) {
    auto n = nat2_up();
    Upset u = n.canonicalize(anti({{0, 127}, {1, 63}}));
    VarId a = var_id("bg.a"), b = var_id("bg.b");
    Form f = n.to_formula(u, {LinTerm::var(a), LinTerm::var(b)});
    EXPECT_EQ(to_sexpr(f), "(or (and (geq bg.a 0) (geq bg.b 127)) (and (geq bg.a 1) (geq bg.b 63)))");
    EXPECT_EQ(to_sexpr(lia_up().to_formula(bound(5), {LinTerm::var(a)})), "(geq bg.a 5)");
}

TEST(Background, Canonicalize) {
    auto n = nat2_up();
    EXPECT_EQ(n.canonicalize(anti({{1, 63}, {0, 127}, {2, 70}})), anti({{0, 127}, {1, 63}}));
    EXPECT_EQ(n.canonicalize(anti({{0, 0}, {3, 3}})).k, Upset::K::All);
    EXPECT_EQ(n.canonicalize(anti({})).k, Upset::K::Empty);
    auto d = nat2_down();
    EXPECT_EQ(d.canonicalize(anti({{1, 2}, {0, 1}})), anti({{1, 2}}));
    EXPECT_EQ(d.canonicalize(anti({{omega(), omega()}})).k, Upset::K::All);
}

TEST(Background, LiaEnumerationSchedule) {
    auto th = lia_up();
    EXPECT_EQ(th.enumerate(0).k, Upset::K::Empty);
    EXPECT_EQ(th.enumerate(1).k, Upset::K::All);
    EXPECT_EQ(th.enumerate(2), bound(0));
    EXPECT_EQ(th.enumerate(3), bound(1));
    EXPECT_EQ(th.enumerate(4), bound(-1));
    for (size_t i = 0; i < 50; ++i)
        EXPECT_EQ(th.level(th.enumerate(i)), i);
}

TEST(Background, NatEnumerationInjectiveAndReaches) {
    TheoryHandle n1(Theory::Nat, 1, Direction::Upward);
    bool found = false;
    for (size_t i = 0; i < 20 && !found; ++i)
        found = n1.enumerate(i) == anti({{3}});
    EXPECT_TRUE(found);
    auto n = nat2_up();
    std::set<Upset> seen;
    for (size_t i = 0; i < 2000; ++i) {
        Upset u = n.enumerate(i);
        EXPECT_EQ(n.canonicalize(u), u);
        EXPECT_TRUE(seen.insert(u).second) << i;
    }
}

TEST(Background, JoinSubset) {
    auto n = nat2_up();
    Upset a = n.principal({2, 0}), b = n.principal({0, 2});
    Upset j = n.join(a, b);
    EXPECT_TRUE(n.subset(a, j));
    EXPECT_TRUE(n.subset(b, j));
    EXPECT_FALSE(n.subset(j, a));
    auto l = lia_up();
    EXPECT_EQ(l.join(bound(3), bound(7)), bound(3));
}

TEST(Background, JsonRoundTrip) {
    auto d = nat2_down();
    Upset u = d.canonicalize(anti({{3, omega()}, {7, 0}}));
    EXPECT_EQ(d.to_json(u).dump(), R"({"kind":"antichain","max":[[3,"inf"],[7,0]]})");
    EXPECT_EQ(d.from_json(d.to_json(u)), u);
    EXPECT_THROW(d.from_json(nlohmann::json::parse(R"({"kind":"atleast","k":1})")), SchemaError);
    EXPECT_THROW(d.from_json(nlohmann::json::parse(R"({"kind":"antichain","max":[[1]]})")), DimensionMismatch);
}

TEST(Background, ClosureOfFormula) {
    VarId x = fresh_var("x"), y = fresh_var("y"), k = fresh_var("k");
    LinTerm X = LinTerm::var(x), Y = LinTerm::var(y), K = LinTerm::var(k);
    auto l = lia_up();
    // {x : exists k >= 2. x = 3k}
    Form f = f_and(f_atom(Rel::Ge, K, LinTerm(2)), f_atom(Rel::Eq, X, K * Int(3)));
    EXPECT_EQ(l.closure_of(f, {x}), bound(6));
    EXPECT_EQ(l.closure_of(f_atom(Rel::Le, X, LinTerm(4)), {x}).k, Upset::K::All);
    EXPECT_EQ(l.closure_of(f_false(), {x}).k, Upset::K::Empty);
    TheoryHandle ld(Theory::LIA, 1, Direction::Downward);
    EXPECT_EQ(ld.closure_of(f, {x}).k, Upset::K::All);
    Upset m = ld.closure_of(f_and(f_atom(Rel::Le, X, LinTerm(10)), f_div(3, X)), {x});
    EXPECT_EQ(m.bound, 9);
    auto n = nat2_up();
    // x + y >= 3
    Upset s = n.closure_of(f_atom(Rel::Ge, X + Y, LinTerm(3)), {x, y});
    EXPECT_EQ(s, anti({{0, 3}, {1, 2}, {2, 1}, {3, 0}}));
    auto d = nat2_down();
    // x <= 3 or y <= 1
    Upset t = d.closure_of(f_or(f_atom(Rel::Le, X, LinTerm(3)), f_atom(Rel::Le, Y, LinTerm(1))), {x, y});
    EXPECT_EQ(t, d.canonicalize(anti({{3, omega()}, {omega(), 1}})));
}

TEST(Background, CompileAtom) {
    Problem p = parse_problem("(theory (nat 2)) (declare R (-> W o))");
    TheoryHandle th(p);
    WEnv env;
    env["w"] = fresh_components("w", 2);
    env["v"] = fresh_components("v", 2);
    Atom a;
    a.k = Atom::K::Bg;
    a.rel = Rel::Lt;
    a.lhs = t_var("w");
    a.rhs = t_var("v");
    Form f = compile_atom(a, env, th);
    Assignment as;
    auto set = [&](const std::string &n, long c0, long c1) {
        as[env[n][0].coeffs()[0].first] = c0;
        as[env[n][1].coeffs()[0].first] = c1;
    };
    set("w", 1, 2);
    set("v", 1, 3);
    EXPECT_TRUE(evaluate(f, as));
    set("v", 1, 2);
    EXPECT_FALSE(evaluate(f, as));
    set("v", 0, 5);
    EXPECT_FALSE(evaluate(f, as));
}

TEST(Background, ExistsSat) {
    Problem p = parse_problem("(theory (lia)) (finsort S (a b))");
    std::vector<VarDecl> vars{{"s", s_fin()}, {"x", s_w()}};
    Atom e1{Atom::K::Eqs, Rel::Eq, t_var("s"), t_sconst("a"), nullptr, {}};
    Atom e2{Atom::K::Eqs, Rel::Eq, t_var("s"), t_sconst("b"), nullptr, {}};
    Atom g{Atom::K::Bg, Rel::Ge, t_var("x"), t_wlit({5}, false), nullptr, {}};
    Atom l{Atom::K::Bg, Rel::Le, t_var("x"), t_wlit({4}, false), nullptr, {}};
    EXPECT_TRUE(exists_sat({e1, g}, vars, p));
    EXPECT_FALSE(exists_sat({e1, e2}, vars, p));
    EXPECT_FALSE(exists_sat({g, l}, vars, p));
}
