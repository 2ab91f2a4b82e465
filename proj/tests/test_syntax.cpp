#include "lchc/syntax.hpp"
#include "lchc/typesys.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lchc;

namespace {

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char *kSmall = R"(
(theory (lia))
(direction upward)
(finsort S (a b))
(declare R (-> S W o))
(clause ((x W)) (head (R a x)) (body (geq x 5)))
(goal ((y W)) (body (and (R b y) (leq y 2))))
)";

} // namespace

TEST(Syntax, DeclarationSort) {
    Problem p = parse_problem(kSmall);
    ASSERT_TRUE(p.decl("R"));
    EXPECT_EQ(sort_str(p.decl("R")), "(-> S W o)");
    EXPECT_EQ(p.fin_elems, (std::vector<std::string>{"a", "b"}));
}

TEST(Syntax, ClauseBody) {
    Problem p = parse_problem(kSmall);
    ASSERT_EQ(p.clauses.size(), 1u);
    auto atoms = body_atoms(p.clauses[0]);
    ASSERT_EQ(atoms.size(), 1u);
    EXPECT_EQ(atoms[0].k, Atom::K::Bg);
    EXPECT_EQ(atoms[0].rel, Rel::Ge);
    EXPECT_EQ(atom_str(atoms[0]), "(geq x 5)");
    EXPECT_EQ(p.goals.size(), 1u);
}

TEST(Syntax, Errors) {
    EXPECT_THROW(parse_problem("(theory (lia)"), ParseError);
    EXPECT_THROW(parse_problem("(theory (lia)) (clause ((x W)) (head (R x)))"), UnknownSymbol);
    EXPECT_THROW(parse_problem("(theory (lia)) (declare R (-> W o)) (clause ((x W)) (head (R x x)))"), ArityMismatch);
    EXPECT_THROW(parse_problem("(theory (lia)) (declare R (-> W o)) (goal ((x W)) (body (R x x)))"), ArityMismatch);
    EXPECT_THROW(parse_problem("(theory (lia)) (declare R (-> W o)) (goal ((x W)) (body (R q)))"), UnknownSymbol);
}

TEST(Syntax, RoundTrip) {
    Problem p = parse_problem(kSmall);
    std::string once = print_problem(p);
    Problem q = parse_problem(once);
    EXPECT_TRUE(problem_eq(p, q));
    EXPECT_EQ(print_problem(q), once);
}

TEST(Syntax, LimitInsertion) {
    Problem p = normalize_problem(parse_problem(kSmall));
    int limits = 0;
    for (auto &c : p.clauses)
        if (is_limit_clause(p, c)) {
            ++limits;
            EXPECT_EQ(clause_str(c).find("(leq y x2)") != std::string::npos, true) << clause_str(c);
        }
    EXPECT_EQ(limits, 1);
}

TEST(Syntax, NormalizeIdempotent) {
    Problem p = normalize_problem(parse_problem(slurp(std::filesystem::path(LCHC_FIXTURES) / "fo_tweet_unsat.lchc")));
    Problem q = normalize_problem(p);
    EXPECT_EQ(print_problem(p), print_problem(q));
}

TEST(Syntax, DisjunctionSplit) {
    Problem p = parse_problem(R"(
(theory (lia))
(declare R (-> W o))
(clause ((x W)) (head (R x)) (body (or (geq x 5) (leq x -5))))
)");
    Problem n = normalize_problem(p);
    int non_limit = 0;
    for (auto &c : n.clauses)
        if (!is_limit_clause(n, c))
            ++non_limit;
    EXPECT_EQ(non_limit, 2);
}

TEST(Syntax, ArgumentHoisting) {
    Problem p = normalize_problem(parse_problem(R"(
(theory (lia))
(declare R (-> W o))
(clause ((x W)) (head (R x)) (body (R (+ x 1))))
)"));
    const Clause &c = p.clauses[0];
    auto atoms = body_atoms(c);
    ASSERT_EQ(atoms.size(), 2u);
    EXPECT_EQ(atoms[0].k, Atom::K::Bg);
    EXPECT_EQ(atoms[1].k, Atom::K::Fg);
    EXPECT_EQ(atoms[1].fg->b->k, Term::K::Var);
}

TEST(Syntax, EveryFixtureParsesAndRoundTrips) {
    int n = 0;
    for (auto &e : std::filesystem::directory_iterator(LCHC_FIXTURES)) {
        if (e.path().extension() != ".lchc")
            continue;
        SCOPED_TRACE(e.path().string());
        Problem p = parse_problem(slurp(e.path()));
        Problem q = parse_problem(print_problem(p));
        EXPECT_TRUE(problem_eq(p, q));
        ++n;
    }
    EXPECT_GE(n, 20);
}
