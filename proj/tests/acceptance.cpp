// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.
#include "lchc/driver.hpp"
#include "lchc/lcm.hpp"
#include "qe_sampling.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace lchc;
namespace fs = std::filesystem;

namespace {

// time limits in seconds
constexpr double kIntegralLimit = 60;
constexpr double kGateLimit = 1;
constexpr double kFrameLimit = 1;
constexpr double kDifferentialLimit = 300;
constexpr double kPresburgerLimit = 120;
constexpr double kLcmLimit = 300;

constexpr int kOracleWindow = 24;
constexpr uint64_t kSimulatorCap = 10;
constexpr uint64_t kExclusionApplications = 3000;
constexpr uint64_t kExclusionCandidates = 200;
constexpr size_t kCorpusMinimum = 40;

const fs::path kFix = LCHC_FIXTURES;

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Outcome {
    bool ok = true;
    std::string detail;
    void require(bool c, const std::string &what) {
        if (!c) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

int failures = 0;

void criterion(int n, const char *name, double limit, const std::function<Outcome()> &f) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = f();
    } catch (const std::exception &e) {
        o.ok = false;
        o.detail = std::string("exception: ") + e.what();
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit > 0 && s > limit)
        o.require(false, "took longer than " + std::to_string(int(limit)) + " s");
    failures += !o.ok;
    std::printf("%s %d %s (%.2f s)%s%s\n", o.ok ? "PASS" : "FAIL", n, name, s, o.detail.empty() ? "" : ": ",
                o.detail.c_str());
    std::fflush(stdout);
}

std::vector<fs::path> corpus() {
    std::vector<fs::path> r;
    for (auto dir : {kFix, kFix / "lcm"})
        for (auto &e : fs::directory_iterator(dir))
            if (e.path().extension() == ".lchc")
                r.push_back(e.path());
    std::sort(r.begin(), r.end());
    return r;
}

Outcome integral() {
    Outcome o;
    auto p255 = prepare(slurp(kFix / "integral255.lchc"));
    auto t0 = std::chrono::steady_clock::now();
    Verdict v = solve(p255);
    double s255 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(v.k == Verdict::K::Unsat, std::string("255: ") + verdict_name(v.k));
    o.require(v.trace && replay(*p255, *v.trace), "255: trace does not replay");
    o.require(s255 < kIntegralLimit, "255 too slow");

    auto p256 = prepare(slurp(kFix / "integral256.lchc"));
    SolveConfig cfg;
    cfg.hint = (kFix / "integral256.model.json").string();
    t0 = std::chrono::steady_clock::now();
    Verdict w = solve(p256, cfg);
    double s256 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(w.k == Verdict::K::Sat, std::string("256: ") + verdict_name(w.k));
    o.require(w.model && verify(p256, serialize_model(*w.model).dump()).ok, "256: witness does not verify");
    o.require(!verify(p255, slurp(kFix / "integral256.model.json")).ok, "256 witness accepted for 255");
    o.require(s256 < kIntegralLimit, "256 too slow");
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("255 UNSAT in ") + std::to_string(s255).substr(0, 5) +
                " s, 256 SAT in " + std::to_string(s256).substr(0, 5) + " s";
    return o;
}

Outcome gate() {
    Outcome o;
    SortP W = s_w(), S = s_fin(), O = s_prop(), WO = s_arrows({W}, O);
    o.require(is_initial(s_arrows({S, W}, O)).ok, "S -> W -> o rejected");
    o.require(is_initial(s_arrows({WO, W, S, WO}, O)).ok, "(W->o) -> W -> S -> (W->o) -> o rejected");
    o.require(!is_initial(s_arrows({W, W}, O)).ok, "W -> W -> o accepted");
    o.require(!is_initial(s_arrows({WO, W}, O)).ok, "(W->o) -> W -> o accepted");
    ValidationReport r = validate(normalize_problem(parse_problem(slurp(kFix / "add.lchc"))));
    o.require(!r.ok(), "Add program accepted");
    bool add1 = false, add2 = false;
    for (auto &v : r.violations) {
        add1 |= v.rfind("O2 at Add1", 0) == 0;
        add2 |= v.rfind("O2 at Add2", 0) == 0;
    }
    o.require(add1 && add2, "expected O2 violations at Add1 and Add2");
    return o;
}

Outcome appendix_frame() {
    Outcome o;
    auto p = prepare(slurp(kFix / "appendix.lchc"));
    Structure m(p);
    for (uint64_t k = 0; k < m.key_space("Y"); ++k) {
        auto xs = m.decode_key("Y", k);
        auto in = [](uint64_t s) { return s == 1 || s == 2; };
        if (in(xs[0]) && in(xs[1]))
            m.set_truth("Y", k, true);
    }
    Upset gt5 = m.theory().principal({6});
    for (uint64_t k = 0; k < m.key_space("X"); ++k) {
        auto xs = m.decode_key("X", k);
        if (xs[2] == 1 && ((xs[1] >> xs[0]) & 1))
            m.set_row("X", k, gt5);
    }
    SortP WO = s_arrows({s_w()}, s_prop());
    o.require(m.frame(WO).size == 1, "frame of W -> o is not {top}");
    const Frame &xi = m.frame(s_arrows({s_w(), WO}, s_prop()));
    o.require(xi.size == 3, "frame has " + std::to_string(xi.size) + " elements");
    std::set<Upset> rows;
    for (auto &r : xi.rows)
        if (r.size() == 1)
            rows.insert(r[0]);
    o.require(rows == std::set<Upset>{m.theory().all(), m.theory().empty(), gt5},
              "elements are not top, bottom and w > 5");
    return o;
}

Verdict::K oracle(const Problem &p) {
    return bounded_canonical_model(p, kOracleWindow).goal_violated ? Verdict::K::Unsat : Verdict::K::Sat;
}

Outcome differential() {
    Outcome o;
    auto expected = nlohmann::json::parse(slurp(kFix / "fo_expected.json"));
    int agree = 0, total = 0;
    for (auto it = expected.begin(); it != expected.end(); ++it) {
        auto p = prepare(slurp(kFix / it.key()));
        ValidationReport r = validate(*p);
        o.require(r.mode == Mode::FirstOrder, it.key() + " is not first-order");
        Verdict v = solve(p);
        Verdict::K want = oracle(*p);
        ++total;
        bool ok = v.k == want && (want == Verdict::K::Sat) == (it.value() == "sat");
        agree += ok;
        o.require(ok, it.key() + ": solver " + verdict_name(v.k) + ", oracle " + verdict_name(want));
    }
    // the multiplication program: G holds of k exactly when k >= 2 * 3
    std::string mult = slurp(kFix / "fo13.lchc");
    mult = mult.substr(0, mult.find("(goal"));
    std::string sweep;
    for (int k = 3; k <= 9; ++k) {
        auto p = prepare(mult + "(goal () (body (G (tuple " + std::to_string(k) + " 0))))");
        Verdict::K got = solve(p).k, want = oracle(*p);
        o.require(got == want, "G " + std::to_string(k) + ": solver and oracle differ");
        o.require((got == Verdict::K::Unsat) == (k >= 6), "G " + std::to_string(k) + " has the wrong verdict");
        if (got == Verdict::K::Unsat)
            sweep += (sweep.empty() ? "" : ",") + std::to_string(k);
    }
    o.require(total == 20, "expected 20 problems");
    o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(agree) + "/" + std::to_string(total) +
                " agree; multiplication goal UNSAT for k in {" + sweep + "}";
    return o;
}

Outcome presburger() {
    Outcome o;
    struct S {
        const char *text;
        bool truth;
    };
    const S sentences[] = {
        {"(exists ((x int)) (eq (+ x x) 6))", true},
        {"(exists ((x int)) (eq (+ x x) 5))", false},
        {"(forall ((x int)) (exists ((y int)) (or (eq x (* 2 y)) (eq x (+ (* 2 y) 1)))))", true},
        {"(forall ((x int)) (exists ((y int)) (eq x (* 2 y))))", false},
        {"(forall ((x nat)) (geq x 0))", true},
        {"(forall ((x int)) (geq x 0))", false},
        {"(exists ((x nat)) (lt x 0))", false},
        {"(forall ((n nat)) (or (lt n 8) (exists ((a nat) (b nat)) (eq n (+ (* 3 a) (* 5 b))))))", true},
        {"(forall ((n nat)) (or (lt n 7) (exists ((a nat) (b nat)) (eq n (+ (* 3 a) (* 5 b))))))", false},
        {"(forall ((x int) (y int)) (or (leq x y) (gt x y)))", true},
        {"(forall ((x int)) (exists ((y int)) (gt y x)))", true},
        {"(exists ((y int)) (forall ((x int)) (gt y x)))", false},
        {"(exists ((x nat)) (forall ((y nat)) (leq x y)))", true},
        {"(exists ((x int)) (forall ((y int)) (leq x y)))", false},
        {"(forall ((x int)) (div 2 (+ x x)))", true},
        {"(forall ((x int)) (or (div 3 x) (div 3 (+ x 1)) (div 3 (+ x 2))))", true},
        {"(forall ((x int)) (or (div 3 x) (div 3 (+ x 1))))", false},
        {"(exists ((x int) (y int)) (eq (+ (* 6 x) (* 10 y)) 2))", true},
        {"(exists ((x int) (y int)) (eq (+ (* 6 x) (* 10 y)) 3))", false},
        {"(exists ((x nat) (y nat)) (eq (+ (* 6 x) (* 10 y)) 2))", false},
        {"(exists ((x nat) (y nat)) (eq (+ (* 6 x) (* 10 y)) 26))", true},
        {"(forall ((x int) (y int)) (or (not (lt x y)) (leq (+ x 1) y)))", true},
        {"(exists ((x int) (y int)) (and (lt x y) (lt y (+ x 1))))", false},
        {"(forall ((x int)) (exists ((q int) (r int)) (and (eq x (+ (* 4 q) r)) (geq r 0) (lt r 4))))", true},
        {"(forall ((x int)) (exists ((q int)) (and (leq (* 3 q) x) (lt x (+ (* 3 q) 2)))))", false},
        {"(exists ((x int)) (and (gt (* 3 x) 10) (lt (* 3 x) 12)))", false},
        {"(exists ((x int)) (and (gt (* 3 x) 10) (lt (* 2 x) 9)))", true},
        {"(forall ((x nat) (y nat)) (or (lt (+ x y) 1) (geq (+ x y) 1)))", true},
        {"(exists ((x int)) (and (div 4 x) (div 6 (+ x 2))))", true},
        {"(exists ((x int)) (and (div 4 x) (div 6 (+ x 1))))", false},
    };
    int right = 0, n = 0;
    for (auto &s : sentences) {
        ++n;
        bool got = pres::decide(pres::parse_formula(s.text));
        right += got == s.truth;
        o.require(got == s.truth, s.text);
    }
    auto r = qe_sampling::run(60, 100, 2024);
    o.require(r.formulas == 60 && r.samples == 6000, "sampling did not run in full");
    o.require(r.mismatches == 0, std::to_string(r.mismatches) + " QE mismatches, first " + r.first_mismatch);
    o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(right) + "/" + std::to_string(n) + " sentences, " +
                std::to_string(r.samples) + " QE samples, " + std::to_string(r.mismatches) + " mismatches";
    return o;
}

Verdict::K solve_lcm(const LCM &m, const LCMConfig &t) {
    return solve(std::make_shared<const Problem>(normalize_problem(encode_lcm(m, t)))).k;
}

Outcome lcm_suite() {
    Outcome o;
    auto targets = nlohmann::json::parse(slurp(kFix / "lcm" / "targets.json"));
    int agree = 0, total = 0, mono = 0;
    for (auto it = targets.begin(); it != targets.end(); ++it) {
        LCM m = LCM::from_json(nlohmann::json::parse(slurp(kFix / "lcm" / it.key())));
        for (auto &ts : it.value()) {
            LCMConfig t = LCMConfig::parse(ts.get<std::string>());
            bool reach = simulate_reachable(m, t, kSimulatorCap);
            Verdict::K got = solve_lcm(m, t);
            ++total;
            bool ok = got == (reach ? Verdict::K::Unsat : Verdict::K::Sat);
            agree += ok;
            o.require(ok, it.key() + " " + ts.get<std::string>() + ": solver " + verdict_name(got));
            if (got != Verdict::K::Unsat)
                continue;
            // every configuration below a reported reachable one is reachable
            std::vector<uint64_t> lower(t.values.size(), 0);
            for (;;) {
                LCMConfig l{t.state, lower};
                bool r = simulate_reachable(m, l, kSimulatorCap) && solve_lcm(m, l) == Verdict::K::Unsat;
                o.require(r, "monotonicity fails below " + ts.get<std::string>());
                ++mono;
                size_t i = 0;
                while (i < lower.size() && lower[i] == t.values[i])
                    lower[i++] = 0;
                if (i == lower.size())
                    break;
                ++lower[i];
            }
        }
    }
    o.require(total == 12, "expected 12 targets");
    o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(agree) + "/" + std::to_string(total) +
                " agree with the simulator, " + std::to_string(mono) + " lower configurations checked";
    return o;
}

Outcome exclusion() {
    Outcome o;
    size_t problems = 0, refuted = 0, modelled = 0;
    for (auto &f : corpus()) {
        auto p = prepare(slurp(f));
        if (!validate(*p).ok())
            continue;
        ++problems;
        bool refutes = false;
        if (auto t = Refuter(p).run(kExclusionApplications))
            refutes = replay(*p, *t);
        bool model = false;
        fs::path hint = f;
        hint.replace_extension(".model.json");
        if (fs::exists(hint))
            model |= verify(p, slurp(hint)).ok;
        try {
            KleeneInfo info;
            auto m = kleene_candidate(p, &info);
            if (m && check_model(*m, *p))
                model |= verify(p, serialize_model(*m).dump()).ok;
            StructureEnumerator en(p);
            for (uint64_t i = 0; i < kExclusionCandidates && !model; ++i) {
                auto c = en.next();
                if (!c)
                    break;
                model |= check_model(*c, *p);
            }
        } catch (const FrameTooLarge &) {
        }
        refuted += refutes;
        modelled += model;
        o.require(!(refutes && model), f.filename().string() + " has a refutation and a model");
    }
    o.require(problems >= kCorpusMinimum, "corpus has only " + std::to_string(problems) + " problems");
    o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(problems) + " problems, " + std::to_string(refuted) +
                " refuted, " + std::to_string(modelled) + " with a verified model, 0 violations";
    if (!o.ok)
        o.detail.erase(o.detail.rfind(", 0 violations"));
    return o;
}

Outcome properties() {
    Outcome o;
    int rc = std::system(LCHC_PROPERTY_TESTS " --gtest_brief=1 > property_tests.log 2>&1");
    o.require(rc == 0, "property suite failed, see property_tests.log");
    if (rc == 0)
        o.detail = "property suite green";
    return o;
}

} // namespace

int main() {
    criterion(1, "Integral/Exp 255 UNSAT with replayable trace, 256 SAT with verified witness", 2 * kIntegralLimit,
              integral);
    criterion(2, "initiality gate", kGateLimit, gate);
    criterion(3, "appendix frame has three elements", kFrameLimit, appendix_frame);
    criterion(4, "first-order differential suite", kDifferentialLimit, differential);
    criterion(5, "Presburger suite", kPresburgerLimit, presburger);
    criterion(6, "lossy counter machine suite", kLcmLimit, lcm_suite);
    criterion(7, "exclusion over the corpus", 0, exclusion);
    criterion(8, "property suites", 0, properties);
    return failures == 0 ? 0 : 1;
}
