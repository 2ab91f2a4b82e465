#include "lchc/typesys.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lchc;

namespace {

SortP W() { return s_w(); }
SortP S() { return s_fin(); }
SortP O() { return s_prop(); }
SortP A(std::vector<SortP> a) { return s_arrows(a, s_prop()); }

Problem load(const std::string &name) {
    std::ifstream in(std::filesystem::path(LCHC_FIXTURES) / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return normalize_problem(parse_problem(ss.str()));
}

} // namespace

TEST(Typesys, Orders) {
    EXPECT_EQ(type_order(A({S(), S()})), 1);
    SortP xi = A({W(), A({W()})});
    SortP rho = s_arrows({S(), A({S()}), O()}, xi);
    EXPECT_EQ(type_order(rho), 2);
    EXPECT_EQ(type_order(A({W(), rho})), 3);
}

TEST(Typesys, InitialityVerdicts) {
    EXPECT_TRUE(is_initial(A({S(), W()})).ok);
    EXPECT_TRUE(is_initial(A({A({W()}), W(), S(), A({W()})})).ok);
    InitialCheck two_w = is_initial(A({W(), W()}));
    EXPECT_FALSE(two_w.ok);
    EXPECT_EQ(two_w.condition, "O1");
    InitialCheck o2 = is_initial(A({A({W()}), W()}));
    EXPECT_FALSE(o2.ok);
    EXPECT_EQ(o2.condition, "O2");
    EXPECT_EQ(o2.position, 1u);
}

TEST(Typesys, ActiveInactive) {
    EXPECT_TRUE(is_active(A({S(), W()})));
    EXPECT_FALSE(is_active(A({S(), S()})));
}

TEST(Typesys, AddRejected) {
    ValidationReport r = validate(load("add.lchc"));
    EXPECT_EQ(r.mode, Mode::Rejected);
    ASSERT_FALSE(r.violations.empty());
    EXPECT_EQ(r.violations[0].rfind("O2 at Add1", 0), 0u) << r.violations[0];
}

TEST(Typesys, Modes) {
    EXPECT_EQ(validate(load("fo_tweet_unsat.lchc")).mode, Mode::FirstOrder);
    ValidationReport it = validate(load("iter_tweet_unsat.lchc"));
    EXPECT_EQ(it.mode, Mode::InitialHigherOrder);
    EXPECT_EQ(it.max_order, 2);
    ValidationReport in = validate(load("integral255.lchc"));
    EXPECT_EQ(in.mode, Mode::InitialHigherOrder);
    ValidationReport ap = validate(load("appendix.lchc"));
    EXPECT_EQ(ap.mode, Mode::InitialHigherOrder) << ap.text();
    EXPECT_EQ(ap.max_order, 3);
}

TEST(Typesys, MissingLimitReported) {
    Problem p = parse_problem(R"(
(theory (lia))
(options require-explicit-limits)
(declare R (-> W o))
(clause ((x W)) (head (R x)) (body (geq x 1)))
)");
    ValidationReport r = validate(normalize_problem(p));
    EXPECT_EQ(r.mode, Mode::Rejected);
}

TEST(Typesys, InsertedLimitsListed) {
    ValidationReport r = validate(load("fo01.lchc"));
    EXPECT_EQ(r.inserted_limits, std::vector<std::string>{"R"});
}

TEST(Typesys, InferSortErrors) {
    Problem p = parse_problem("(theory (nat 2)) (declare R (-> W o))");
    Env env{{"x", s_w()}};
    EXPECT_THROW(infer_sort(t_var("y"), env, p), UnboundVariable);
    EXPECT_THROW(infer_sort(t_wlit({1, 2, 3}, true), env, p), TypeError);
    EXPECT_THROW(infer_sort(t_app(t_pred("R"), t_sconst("a")), env, p), std::exception);
    EXPECT_TRUE(sort_eq(infer_sort(t_comp(t_var("x"), 1), env, p), s_num()));
}
