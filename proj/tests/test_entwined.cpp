#include "lchc/entwined.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace lchc;

namespace {

std::string slurp(const std::string &name) {
    std::ifstream in(std::filesystem::path(LCHC_FIXTURES) / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SortP W() { return s_w(); }
SortP S() { return s_fin(); }
SortP O() { return s_prop(); }

SortP rho() { return s_arrows({S(), s_arrows({S()}, O()), O(), W(), s_arrows({W()}, O())}, O()); }
SortP xi() { return s_arrows({W(), s_arrows({W()}, O())}, O()); }

// B2 of the appendix: X s f b w g holds iff b, f s and w > 5.
Structure appendix_b2(std::shared_ptr<const Problem> p) {
    Structure m(p);
    for (uint64_t k = 0; k < 4 * 4; ++k) {
        auto xs = m.decode_key("Y", k);
        auto in = [](uint64_t s) { return s == 1 || s == 2; }; // diamond, spade
        if (in(xs[0]) && in(xs[1]))
            m.set_truth("Y", k, true);
    }
    Upset gt5 = m.theory().principal({6});
    for (uint64_t k = 0; k < m.key_space("X"); ++k) {
        auto xs = m.decode_key("X", k); // s, f, b, g
        if (xs[2] == 1 && ((xs[1] >> xs[0]) & 1))
            m.set_row("X", k, gt5);
    }
    return m;
}

TermP z_body() {
    return t_apps(t_var("h"), {t_sconst("heart"), t_app(t_pred("Y"), t_sconst("spade")), t_bool(true), t_var("w"),
                               t_var("g")});
}

} // namespace

TEST(Entwined, AppendixFrames) {
    auto p = prepare(slurp("appendix.lchc"));
    Structure m = appendix_b2(p);
    EXPECT_EQ(m.stages(), 4);
    const Frame &wo = m.frame(s_arrows({W()}, O()));
    EXPECT_EQ(wo.size, 1u);
    EXPECT_EQ(m.canon(wo, 0), nlohmann::json({{"top", "(-> W o)"}}));

    const Frame &f = m.frame(xi());
    ASSERT_EQ(f.k, Frame::K::CaseII);
    ASSERT_EQ(f.size, 3u);
    std::set<Upset> rows;
    for (auto &r : f.rows) {
        ASSERT_EQ(r.size(), 1u);
        rows.insert(r[0]);
    }
    EXPECT_EQ(rows, (std::set<Upset>{m.theory().all(), m.theory().empty(), m.theory().principal({6})}));
    EXPECT_TRUE(m.frame(rho()).huge);
}

TEST(Entwined, AppendixEvaluation) {
    auto p = prepare(slurp("appendix.lchc"));
    Structure m = appendix_b2(p);
    auto lam = std::make_shared<Lambda>();
    lam->params = {{"w", W()}, {"h", rho()}};
    lam->tops = {{"g", s_arrows({W()}, O())}};
    lam->body = z_body();
    m.set_lambda("Z", lam);
    EXPECT_FALSE(eval_closed(m, t_apps(t_pred("Z"), {t_wlit({5}, false), t_pred("X")})));
    EXPECT_FALSE(eval_closed(m, t_apps(t_pred("Z"), {t_wlit({9}, false), t_pred("X")})));

    // through X directly, with the suit f holds of
    auto top = t_var("g");
    Valuation v;
    v.vals["g"] = elem_val(s_arrows({W()}, O()), 0);
    auto x = [&](const char *s, long w) {
        return t_apps(t_pred("X"), {t_sconst(s), t_app(t_pred("Y"), t_sconst("spade")), t_bool(true),
                                    t_wlit({w}, false), top});
    };
    EXPECT_TRUE(pres::decide(eval_atom(m, x("diamond", 6), v)));
    EXPECT_FALSE(pres::decide(eval_atom(m, x("diamond", 5), v)));
    EXPECT_FALSE(pres::decide(eval_atom(m, x("heart", 6), v)));
}

TEST(Entwined, CheckClauseWithThreshold) {
    auto p = prepare("(theory (lia)) (direction upward) (declare R (-> W o))"
                     "(clause ((x W)) (head (R x)) (body (geq x 5)))"
                     "(goal () (body (R 3)))");
    Structure m(p);
    m.set_row("R", 0, m.theory().principal({5}));
    EXPECT_TRUE(check_clause(m, p->clauses[0]));
    EXPECT_TRUE(check_model(m, *p));
    m.set_row("R", 0, m.theory().principal({6}));
    EXPECT_FALSE(check_clause(m, p->clauses[0]));
    m.set_row("R", 0, m.theory().principal({3}));
    EXPECT_TRUE(models_definite(m, *p));
    EXPECT_FALSE(check_model(m, *p));
}

TEST(Entwined, IntegralFixpoint) {
    auto p256 = prepare(slurp("integral256.lchc"));
    KleeneInfo info;
    auto m = kleene_candidate(p256, &info);
    ASSERT_TRUE(m.has_value());
    EXPECT_TRUE(info.converged);
    EXPECT_TRUE(info.models_all);
    EXPECT_TRUE(check_model(*m, *p256));

    auto p255 = prepare(slurp("integral255.lchc"));
    KleeneInfo info255;
    auto m255 = kleene_candidate(p255, &info255);
    ASSERT_TRUE(m255.has_value());
    EXPECT_TRUE(info255.models_definite);
    EXPECT_FALSE(info255.models_all);
}

TEST(Entwined, ModelRoundTrip) {
    auto p = prepare(slurp("integral256.lchc"));
    auto m = kleene_candidate(p);
    ASSERT_TRUE(m.has_value());
    auto j = serialize_model(*m);
    Structure back = deserialize_model(p, j);
    EXPECT_TRUE(back.same_tables(*m));
    EXPECT_EQ(serialize_model(back), j);

    auto bundled = nlohmann::json::parse(slurp("integral256.model.json"));
    EXPECT_TRUE(check_model(deserialize_model(p, bundled), *p));
    auto p255 = prepare(slurp("integral255.lchc"));
    EXPECT_FALSE(check_model(deserialize_model(p255, bundled), *p255));
}

TEST(Entwined, SchemaErrors) {
    auto p = prepare(slurp("integral256.lchc"));
    using nlohmann::json;
    EXPECT_THROW(deserialize_model(p, json::array()), SchemaError);
    EXPECT_THROW(deserialize_model(p, json{{"predicates", {{"Nope", {{"rows", json::array()}}}}}}), SchemaError);
    EXPECT_THROW(deserialize_model(p, json{{"stages", 7}, {"predicates", json::object()}}), FrameInconsistency);
    EXPECT_THROW(deserialize_model(p, json{{"predicates", {{"Exp", {{"kind", "inactive"}, {"rows", json::array()}}}}}}),
                 SchemaError);
    json bad_row = {{"predicates",
                     {{"Exp", {{"kind", "active"}, {"rows", {{{"pre", {{{"s", "x"}}}}, {"post", json::array()},
                                                              {"upset", {{"kind", "all"}}}}}}}}}}};
    EXPECT_THROW(deserialize_model(p, bad_row), SchemaError);
}

TEST(Entwined, TypeOrderedStages) {
    auto p = prepare(slurp("appendix.lchc"));
    Structure m(p);
    EXPECT_EQ(m.pred("Y").order, 1);
    EXPECT_EQ(m.pred("X").order, 2);
    EXPECT_EQ(m.pred("Z").order, 3);
    EXPECT_FALSE(m.pred("Y").active);
    EXPECT_TRUE(m.pred("X").active);
    EXPECT_EQ(m.pred("X").npre, 3u);
}

TEST(Entwined, RejectsNonInitialSorts) {
    auto p = prepare(slurp("add.lchc"));
    EXPECT_THROW(Structure m(p); (void)m.frame(s_arrows({W()}, O())), std::invalid_argument);
}

TEST(Entwined, EnumeratorFindsThreshold) {
    auto p = prepare("(theory (lia)) (direction upward) (declare R (-> W o))"
                     "(clause ((x W)) (head (R x)) (body (geq x 5)))"
                     "(goal () (body (R 3)))");
    StructureEnumerator en(p);
    bool found = false;
    for (int i = 0; i < 200 && !found; ++i) {
        auto m = en.next();
        ASSERT_TRUE(m.has_value());
        found = check_model(*m, *p);
    }
    EXPECT_TRUE(found);
}
