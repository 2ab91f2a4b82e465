#include "lchc/driver.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lchc;

namespace {

std::string fixture(const std::string &name) { return (std::filesystem::path(LCHC_FIXTURES) / name).string(); }

std::string slurp(const std::string &name) {
    std::ifstream in(fixture(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "lchc");
    std::vector<const char *> argv;
    for (auto &a : args)
        argv.push_back(a.c_str());
    return cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace

TEST(Driver, ExitCodes) {
    EXPECT_EQ(exit_code(Verdict::K::Sat), 10);
    EXPECT_EQ(exit_code(Verdict::K::Unsat), 20);
    EXPECT_EQ(exit_code(Verdict::K::Unknown), 30);
    EXPECT_EQ(exit_code(Verdict::K::Invalid), 2);
}

TEST(Driver, ThresholdSat) {
    auto p = prepare("(theory (lia)) (direction upward) (declare R (-> W o))"
                     "(clause ((y W)) (head (R y)) (body (geq y 5)))"
                     "(goal () (body (R 3)))");
    Verdict v = solve(p);
    ASSERT_EQ(v.k, Verdict::K::Sat);
    ASSERT_TRUE(v.model.has_value());
    EXPECT_TRUE(check_model(*v.model, *p));
    EXPECT_FALSE(v.model->theory().member({3}, v.model->row("R", 0)));
}

TEST(Driver, ThresholdSatByEnumeration) {
    auto p = prepare("(theory (lia)) (direction upward) (declare R (-> W o))"
                     "(clause ((y W)) (head (R y)) (body (geq y 5)))"
                     "(goal () (body (R 3)))");
    SolveConfig cfg;
    cfg.kleene = false;
    cfg.workers = 3;
    Verdict v = solve(p, cfg);
    ASSERT_EQ(v.k, Verdict::K::Sat);
    EXPECT_EQ(v.source, "enumeration");
    EXPECT_TRUE(check_model(*v.model, *p));
}

TEST(Driver, Invalid) {
    Verdict v = solve(prepare(slurp("add.lchc")));
    EXPECT_EQ(v.k, Verdict::K::Invalid);
    EXPECT_FALSE(v.report.ok());
    SolveConfig cfg;
    cfg.mode = SolveMode::FirstOrder;
    EXPECT_EQ(solve(prepare(slurp("integral255.lchc")), cfg).k, Verdict::K::Invalid);
}

TEST(Driver, BudgetGivesUnknown) {
    SolveConfig cfg;
    cfg.kleene = false;
    cfg.total_budget = 10;
    cfg.resolution_slice = 5;
    cfg.model_slice = 1;
    Verdict v = solve(prepare(slurp("integral255.lchc")), cfg);
    EXPECT_EQ(v.k, Verdict::K::Unknown);
    EXPECT_LE(v.stats.applications + v.stats.candidates, 10u);
}

TEST(Driver, HintIsUsedFirst) {
    SolveConfig cfg;
    cfg.hint = fixture("integral256.model.json");
    cfg.kleene = false;
    Verdict v = solve(prepare(slurp("integral256.lchc")), cfg);
    ASSERT_EQ(v.k, Verdict::K::Sat);
    EXPECT_EQ(v.source, "hint");
    EXPECT_EQ(v.to_json()["verdict"], "SAT");
}

TEST(Driver, Verify) {
    auto p256 = prepare(slurp("integral256.lchc"));
    auto p255 = prepare(slurp("integral255.lchc"));
    std::string w = slurp("integral256.model.json");
    EXPECT_TRUE(verify(p256, w).ok);
    EXPECT_FALSE(verify(p255, w).ok);
    VerifyResult t = verify(p256, w.substr(0, w.size() / 2));
    EXPECT_FALSE(t.ok);
    EXPECT_NE(t.diagnostic.find("SchemaError"), std::string::npos);
}

TEST(Driver, SlicesDoNotChangeVerdicts) {
    for (const char *f : {"fo02.lchc", "fo05.lchc", "fo_tweet_unsat.lchc"}) {
        auto p = prepare(slurp(f));
        SolveConfig a, b;
        b.resolution_slice = 7;
        b.model_slice = 3;
        b.workers = 2;
        EXPECT_EQ(solve(p, a).k, solve(p, b).k) << f;
    }
}

TEST(Driver, Cli) {
    testing::internal::CaptureStdout();
    EXPECT_EQ(run({"typecheck", fixture("add.lchc")}), 2);
    std::string out = testing::internal::GetCapturedStdout();
    EXPECT_EQ(out.rfind("Rejected(O2 at Add1", 0), 0u) << out;

    testing::internal::CaptureStdout();
    EXPECT_EQ(run({"verify-model", fixture("integral256.lchc"), fixture("integral256.model.json")}), 0);
    EXPECT_EQ(testing::internal::GetCapturedStdout(), "true\n");

    testing::internal::CaptureStdout();
    EXPECT_EQ(run({"solve", fixture("fo02.lchc")}), 20);
    EXPECT_EQ(testing::internal::GetCapturedStdout(), "UNSAT\n");

    testing::internal::CaptureStdout();
    EXPECT_EQ(run({"eval", fixture("integral256.lchc"), fixture("integral256.model.json"), "(Exp (tuple 0 127))"}), 0);
    EXPECT_EQ(testing::internal::GetCapturedStdout(), "true\n");

    testing::internal::CaptureStdout();
    EXPECT_EQ(run({"decide-lia", "(forall ((x int)) (exists ((y int)) (eq x (+ y 1))))"}), 0);
    EXPECT_EQ(testing::internal::GetCapturedStdout(), "true\n");

    testing::internal::CaptureStderr();
    EXPECT_EQ(run({"solve", fixture("does-not-exist.lchc")}), 1);
    EXPECT_EQ(run({"frobnicate"}), 1);
    testing::internal::GetCapturedStderr();
}
