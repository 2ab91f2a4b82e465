#include "lchc/presburger.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lchc::pres;

namespace {

bool dec(const std::string &s) { return decide(parse_formula(s)); }

} // namespace

TEST(Presburger, ParityOfSumOfTwoEqualValues) {
    EXPECT_FALSE(dec("(exists ((x int)) (eq (+ x x) 5))"));
    EXPECT_TRUE(dec("(exists ((x int)) (eq (+ x x) 6))"));
}

TEST(Presburger, EveryIntegerIsEvenOrOdd) {
    EXPECT_TRUE(dec("(forall ((x int)) (exists ((y int)) (or (eq x (* 2 y)) (eq x (+ (* 2 y) 1)))))"));
    EXPECT_FALSE(dec("(forall ((x int)) (exists ((y int)) (eq x (* 2 y))))"));
}

TEST(Presburger, NaturalQuantifierIsRelativized) {
    EXPECT_TRUE(dec("(exists ((x nat) (y nat)) (and (eq (+ x y) 3) (gt x y)))"));
    EXPECT_FALSE(dec("(exists ((x nat)) (lt x 0))"));
    EXPECT_TRUE(dec("(forall ((x nat)) (geq x 0))"));
    EXPECT_FALSE(dec("(forall ((x int)) (geq x 0))"));
}

TEST(Presburger, AlternationNeedsQuantifierElimination) {
    // every natural >= 8 is a sum of 3s and 5s
    EXPECT_TRUE(dec("(forall ((n nat)) (or (lt n 8) (exists ((a nat) (b nat)) (eq n (+ (* 3 a) (* 5 b))))))"));
    EXPECT_FALSE(dec("(forall ((n nat)) (or (lt n 7) (exists ((a nat) (b nat)) (eq n (+ (* 3 a) (* 5 b))))))"));
    EXPECT_TRUE(dec("(exists ((x int)) (forall ((y int)) (or (leq y x) (gt y (+ x 0)))))"));
}

TEST(Presburger, DivisibilityAndNonUnitCoefficients) {
    EXPECT_TRUE(dec("(exists ((x int)) (and (leq 1 (* 3 x)) (leq (* 3 x) 2)))") == false);
    EXPECT_TRUE(dec("(exists ((x int)) (and (leq 1 (* 2 x)) (leq (* 3 x) 5)))"));
    EXPECT_TRUE(dec("(exists ((x int)) (and (div 4 x) (div 6 (+ x 2))))"));
    EXPECT_FALSE(dec("(exists ((x int)) (and (div 4 x) (div 6 (+ x 1))))"));
    EXPECT_FALSE(dec("(exists ((x int) (y int)) (and (eq (* 2 x) (+ (* 4 y) 1))))"));
}

TEST(Presburger, FreeVariablesAreRejected) {
    EXPECT_THROW(decide(parse_formula("(exists ((x int)) (eq x z))")), FreeVariableError);
}

TEST(Presburger, SatisfiableClosesExistentially) {
    EXPECT_TRUE(satisfiable(parse_formula("(and (leq a b) (leq b c) (lt c (+ a 1)))")));
    EXPECT_FALSE(satisfiable(parse_formula("(and (lt a b) (lt b c) (lt c a))")));
    EXPECT_FALSE(satisfiable(parse_formula("(and (leq 0 p) (leq p 10) (eq (* 7 p) (+ (* 11 q) 100)) (leq 0 q) (leq q 1))")));
}

TEST(Presburger, EliminationAgreesOnSampledPoints) {
    // exists y. x <= 3y <= x + 1 and y >= z: compare the eliminated formula with brute force
    Form f = parse_formula("(exists ((y int)) (and (leq x (* 3 y)) (leq (* 3 y) (+ x 1)) (geq y z)))");
    Form q = eliminate(f);
    ASSERT_TRUE(is_quantifier_free(q));
    VarId x = var_id("x"), z = var_id("z");
    for (int xv = -12; xv <= 12; ++xv)
        for (int zv = -6; zv <= 6; ++zv) {
            bool brute = false;
            for (int y = -20; y <= 20; ++y)
                if (xv <= 3 * y && 3 * y <= xv + 1 && y >= zv)
                    brute = true;
            EXPECT_EQ(evaluate(q, {{x, xv}, {z, zv}}), brute) << xv << " " << zv;
        }
}

TEST(Presburger, PrintParseRoundTrip) {
    Form f = parse_formula("(forall ((n nat)) (or (lt n 8) (div 3 (+ n (* -2 m)))))");
    EXPECT_EQ(to_sexpr(parse_formula(to_sexpr(f))), to_sexpr(f));
}
