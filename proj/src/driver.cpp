#include "lchc/driver.hpp"

#include "lchc/lcm.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

namespace lchc {

using nlohmann::json;

const char *verdict_name(Verdict::K k) {
    switch (k) {
    case Verdict::K::Sat: return "SAT";
    case Verdict::K::Unsat: return "UNSAT";
    case Verdict::K::Unknown: return "UNKNOWN";
    case Verdict::K::Invalid: return "INVALID";
    }
    return "?";
}

int exit_code(Verdict::K k) {
    switch (k) {
    case Verdict::K::Sat: return 10;
    case Verdict::K::Unsat: return 20;
    case Verdict::K::Unknown: return 30;
    case Verdict::K::Invalid: return 2;
    }
    return 1;
}

json Verdict::to_json() const {
    json j = {{"verdict", verdict_name(k)},
              {"mode", mode_name(report.mode)},
              {"stats",
               {{"applications", stats.applications},
                {"candidates", stats.candidates},
                {"kleeneIterations", stats.kleene_iterations},
                {"refutationExhausted", stats.refutation_exhausted},
                {"enumerationExhausted", stats.enumeration_exhausted},
                {"seconds", stats.seconds}}}};
    if (!source.empty())
        j["source"] = source;
    if (!note.empty())
        j["note"] = note;
    if (model)
        j["model"] = serialize_model(*model);
    if (trace)
        j["proof"] = trace->to_json();
    if (k == K::Invalid)
        j["report"] = json::parse(report.json());
    return j;
}

namespace {

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool checks(const Structure &m, const Problem &p) {
    try {
        return check_model(m, p);
    } catch (const FrameTooLarge &) {
        return false;
    }
}

} // namespace

Verdict solve(std::shared_ptr<const Problem> p, const SolveConfig &cfg) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    auto done = [&](Verdict::K k) {
        v.k = k;
        v.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return v;
    };
    v.report = validate(*p);
    if (!v.report.ok())
        return done(Verdict::K::Invalid);
    if (cfg.mode == SolveMode::FirstOrder && v.report.mode != Mode::FirstOrder) {
        v.note = "the problem is not first-order";
        return done(Verdict::K::Invalid);
    }

    std::optional<json> hint = cfg.hint_json;
    if (!hint && cfg.hint) {
        try {
            hint = json::parse(read_file(*cfg.hint));
        } catch (const std::exception &e) {
            v.note = std::string("hint ignored: ") + e.what();
        }
    }
    if (hint) {
        try {
            Structure m = deserialize_model(p, *hint);
            if (checks(m, *p)) {
                v.model = std::move(m);
                v.source = "hint";
                return done(Verdict::K::Sat);
            }
            v.note = "hint is not a model";
        } catch (const std::exception &e) {
            v.note = std::string("hint ignored: ") + e.what();
        }
    }

    if (cfg.kleene) {
        KleeneInfo info;
        auto m = kleene_candidate(p, &info);
        v.stats.kleene_iterations = info.iterations;
        if (m && info.models_all && checks(*m, *p)) {
            v.model = std::move(m);
            v.source = "fixpoint";
            return done(Verdict::K::Sat);
        }
    }

    Refuter refuter(p);
    StructureEnumerator en(p);
    bool enumerating = true;
    uint64_t rslice = std::max<uint64_t>(cfg.resolution_slice, 1);
    uint64_t mslice = std::max<uint64_t>(cfg.model_slice, 1);
    unsigned workers = std::max(cfg.workers, 1u);
    auto spent = [&] { return v.stats.applications + v.stats.candidates; };
    auto left = [&]() -> uint64_t {
        if (!cfg.total_budget)
            return UINT64_MAX;
        return *cfg.total_budget > spent() ? *cfg.total_budget - spent() : 0;
    };
    for (;;) {
        if (left() == 0) {
            v.note = "budget exhausted";
            return done(Verdict::K::Unknown);
        }
        if (!refuter.exhausted()) {
            auto t = refuter.run(std::min(rslice, left()));
            v.stats.applications = refuter.applications();
            v.stats.refutation_exhausted = refuter.exhausted();
            if (t) {
                if (!replay(*p, *t))
                    throw std::logic_error("refutation failed to replay");
                v.trace = std::move(t);
                v.source = "resolution";
                return done(Verdict::K::Unsat);
            }
        }
        if (enumerating && left() > 0) {
            std::vector<Structure> batch;
            try {
                while (batch.size() < std::min(mslice, left())) {
                    auto m = en.next();
                    if (!m) {
                        enumerating = false;
                        v.stats.enumeration_exhausted = true;
                        break;
                    }
                    batch.push_back(std::move(*m));
                }
            } catch (const FrameTooLarge &) {
                enumerating = false;
            }
            v.stats.candidates += batch.size();
            // check in parallel, report the first model in stream order
            std::vector<char> ok(batch.size(), 0);
            for (size_t lo = 0; lo < batch.size(); lo += workers) {
                size_t hi = std::min(batch.size(), lo + workers);
                std::vector<std::future<bool>> fs;
                for (size_t i = lo + 1; i < hi; ++i)
                    fs.push_back(std::async(std::launch::async, [&, i] { return checks(batch[i], *p); }));
                ok[lo] = checks(batch[lo], *p);
                for (size_t i = lo + 1; i < hi; ++i)
                    ok[i] = fs[i - lo - 1].get();
                for (size_t i = lo; i < hi; ++i)
                    if (ok[i]) {
                        v.model = std::move(batch[i]);
                        v.source = "enumeration";
                        return done(Verdict::K::Sat);
                    }
            }
        }
        if (refuter.exhausted() && !enumerating) {
            v.note = "the refutation search space is exhausted, so the problem is satisfiable, "
                     "but no model witness was found";
            return done(Verdict::K::Unknown);
        }
    }
}

VerifyResult verify(std::shared_ptr<const Problem> p, const std::string &witness_text) {
    VerifyResult r;
    try {
        ValidationReport rep = validate(*p);
        if (!rep.ok()) {
            r.diagnostic = "problem rejected: " + rep.text();
            return r;
        }
        json j = json::parse(witness_text);
        Structure m = deserialize_model(p, j);
        r.ok = check_model(m, *p);
        if (!r.ok)
            r.diagnostic = "some clause is violated";
    } catch (const json::parse_error &e) {
        r.diagnostic = std::string("SchemaError: ") + e.what();
    } catch (const SchemaError &e) {
        r.diagnostic = std::string("SchemaError: ") + e.what();
    } catch (const std::exception &e) {
        r.diagnostic = e.what();
    }
    return r;
}

namespace {

void write_file(const std::string &path, const std::string &text) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

// Parses an atom in the signature of a problem.
TermP parse_atom(const std::string &problem_text, const std::string &atom) {
    Problem q = parse_problem(problem_text + "\n(goal () (body " + atom + "))\n");
    const Clause &g = q.goals.back();
    if (g.body->k != Body::K::AtomK || g.body->atom.k != Atom::K::Fg)
        throw std::runtime_error("expected a foreground atom");
    return g.body->atom.fg;
}

} // namespace

int cli(int argc, const char *const *argv) {
    CLI::App app{"Satisfiability of initial limit Datalog problems"};
    app.require_subcommand(1);

    std::string file, model_file, atom, machine, target, out_file, hint, emit_proof, emit_model, mode = "auto";
    bool as_json = false, cover = false;
    uint64_t budget_res = 1000, budget_models = 50, total = 0, simulate = 0;
    unsigned workers = 1;

    auto *solve_cmd = app.add_subcommand("solve", "decide satisfiability");
    solve_cmd->add_option("problem", file)->required();
    solve_cmd->add_option("--budget-resolution", budget_res, "rule applications per round")->check(CLI::PositiveNumber);
    solve_cmd->add_option("--budget-models", budget_models, "candidate models per round")->check(CLI::PositiveNumber);
    solve_cmd->add_option("--total-budget", total, "applications plus candidates before giving up");
    solve_cmd->add_option("--hint", hint, "model witness to try first");
    solve_cmd->add_option("--mode", mode)->check(CLI::IsMember({"auto", "fo", "initial"}));
    solve_cmd->add_option("--emit-proof", emit_proof);
    solve_cmd->add_option("--emit-model", emit_model);
    solve_cmd->add_option("--workers", workers)->check(CLI::PositiveNumber);
    solve_cmd->add_flag("--json", as_json);

    auto *tc = app.add_subcommand("typecheck", "validate sorts and initiality");
    tc->add_option("problem", file)->required();
    tc->add_flag("--json", as_json);

    auto *vm = app.add_subcommand("verify-model", "check a model witness");
    vm->add_option("problem", file)->required();
    vm->add_option("model", model_file)->required();
    vm->add_flag("--json", as_json);

    auto *ev = app.add_subcommand("eval", "evaluate a closed atom in a model witness");
    ev->add_option("problem", file)->required();
    ev->add_option("model", model_file)->required();
    ev->add_option("atom", atom)->required();

    auto *enc = app.add_subcommand("encode-lcm", "encode lossy counter machine reachability");
    enc->add_option("machine", machine)->required();
    enc->add_option("--target", target, "state and counter values, e.g. q,3,0")->required();
    enc->add_option("-o,--output", out_file);
    enc->add_flag("--cover", cover, "ask for a configuration at or above the target");
    enc->add_option("--simulate", simulate)->group("");

    std::string formula;
    auto *dl = app.add_subcommand("decide-lia", "decide a Presburger sentence")->group("");
    dl->add_option("formula", formula)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*dl) {
            std::cout << (pres::decide(pres::parse_formula(formula)) ? "true" : "false") << "\n";
            return 0;
        }
        if (*enc) {
            LCM m = LCM::from_json(json::parse(read_file(machine)));
            LCMConfig t = LCMConfig::parse(target);
            if (simulate > 0) {
                bool r = simulate_reachable(m, t, simulate);
                std::cout << (r ? "reachable" : "unreachable") << "\n";
                return 0;
            }
            std::string text = print_problem(encode_lcm(m, t, cover));
            if (out_file.empty())
                std::cout << text;
            else
                write_file(out_file, text);
            return 0;
        }

        std::string text = read_file(file);
        auto p = prepare(text);

        if (*tc) {
            ValidationReport r = validate(*p);
            std::cout << (as_json ? r.json() + "\n" : r.text());
            return r.ok() ? 0 : 2;
        }
        if (*vm) {
            VerifyResult r = verify(p, read_file(model_file));
            if (as_json)
                std::cout << json{{"valid", r.ok}, {"diagnostic", r.diagnostic}}.dump() << "\n";
            else
                std::cout << (r.ok ? "true" : "false") << "\n";
            if (!r.diagnostic.empty())
                std::cerr << r.diagnostic << "\n";
            return 0;
        }
        if (*ev) {
            ValidationReport rep = validate(*p);
            if (!rep.ok()) {
                std::cerr << rep.text();
                return 2;
            }
            Structure m = deserialize_model(p, json::parse(read_file(model_file)));
            std::cout << (eval_closed(m, parse_atom(text, atom)) ? "true" : "false") << "\n";
            return 0;
        }

        SolveConfig cfg;
        cfg.resolution_slice = budget_res;
        cfg.model_slice = budget_models;
        if (total > 0)
            cfg.total_budget = total;
        if (!hint.empty())
            cfg.hint = hint;
        cfg.mode = mode == "fo" ? SolveMode::FirstOrder : mode == "initial" ? SolveMode::Initial : SolveMode::Auto;
        cfg.workers = workers;
        Verdict v = solve(p, cfg);
        if (as_json) {
            std::cout << v.to_json().dump() << "\n";
        } else {
            std::cout << verdict_name(v.k) << "\n";
            if (v.k == Verdict::K::Invalid)
                std::cerr << v.report.text();
            if (!v.note.empty())
                std::cerr << v.note << "\n";
        }
        if (!emit_model.empty() && v.model)
            write_file(emit_model, serialize_model(*v.model).dump(1) + "\n");
        if (!emit_proof.empty() && v.trace)
            write_file(emit_proof, v.trace->to_json().dump(1) + "\n");
        return exit_code(v.k);
    } catch (const ParseError &e) {
        std::cerr << "parse error at " << e.loc.str() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace lchc
