#include "lchc/entwined.hpp"

#include <algorithm>

namespace lchc {

using nlohmann::json;

json serialize_model(const Structure &m) {
    json preds = json::object();
    for (auto &pi : m.preds()) {
        const Table &t = m.table(pi.name);
        if (t.lambda)
            throw SchemaError("predicate " + pi.name + " has no table");
        std::vector<const Frame *> fs;
        for (auto &s : pi.key_sorts)
            fs.push_back(&m.frame(s));
        auto names = [&](uint64_t key, size_t from, size_t to) {
            auto xs = m.decode_key(pi.name, key);
            json a = json::array();
            for (size_t i = from; i < to; ++i)
                a.push_back(m.canon(*fs[i], xs[i]));
            return a;
        };
        json rows = json::array();
        if (pi.active) {
            for (auto &[k, u] : t.rows)
                rows.push_back({{"pre", names(k, 0, pi.npre)},
                                {"post", names(k, pi.npre, fs.size())},
                                {"upset", m.theory().to_json(u)}});
            preds[pi.name] = {{"kind", "active"}, {"rows", rows}};
        } else {
            for (auto k : t.trues)
                rows.push_back({{"args", names(k, 0, fs.size())}, {"value", true}});
            preds[pi.name] = {{"kind", "inactive"}, {"rows", rows}};
        }
    }
    return {{"stages", m.stages()}, {"predicates", preds}};
}

Structure deserialize_model(std::shared_ptr<const Problem> p, const json &j) {
    Structure m(std::move(p));
    if (!j.is_object() || !j.contains("predicates") || !j["predicates"].is_object())
        throw SchemaError("a model needs a \"predicates\" object");
    if (j.contains("stages") && (!j["stages"].is_number_integer() || j["stages"].get<int>() != m.stages()))
        throw FrameInconsistency("model has " + j["stages"].dump() + " stages, the problem needs " +
                                 std::to_string(m.stages()));
    const json &ps = j["predicates"];
    for (auto it = ps.begin(); it != ps.end(); ++it)
        if (!m.has_pred(it.key()))
            throw SchemaError("unknown predicate " + it.key());
    std::vector<const PredInfo *> order;
    for (auto &pi : m.preds())
        order.push_back(&pi);
    std::stable_sort(order.begin(), order.end(), [](auto *a, auto *b) { return a->order < b->order; });
    for (auto *pi : order) {
        if (!ps.contains(pi->name))
            continue;
        const json &e = ps[pi->name];
        if (!e.is_object() || !e.contains("rows") || !e["rows"].is_array())
            throw SchemaError("malformed table for " + pi->name);
        std::string kind = e.value("kind", pi->active ? "active" : "inactive");
        if (kind != (pi->active ? "active" : "inactive"))
            throw SchemaError("table kind of " + pi->name + " does not match its sort");
        auto elems = [&](const json &a, size_t from) {
            std::vector<uint64_t> xs;
            if (!a.is_array())
                throw SchemaError("argument list expected in " + pi->name);
            for (size_t i = 0; i < a.size(); ++i) {
                if (from + i >= pi->key_sorts.size())
                    throw FrameInconsistency("too many arguments in a row of " + pi->name);
                xs.push_back(m.from_canon(m.frame(pi->key_sorts[from + i]), a[i]));
            }
            return xs;
        };
        // collect first: frames of this order must not change while reading
        std::vector<std::pair<uint64_t, Upset>> rows;
        std::vector<uint64_t> trues;
        for (auto &r : e["rows"]) {
            if (pi->active) {
                auto xs = elems(r.at("pre"), 0);
                if (xs.size() != pi->npre)
                    throw FrameInconsistency("wrong number of arguments before W in " + pi->name);
                auto post = elems(r.at("post"), pi->npre);
                xs.insert(xs.end(), post.begin(), post.end());
                if (xs.size() != pi->key_sorts.size())
                    throw FrameInconsistency("wrong number of arguments in a row of " + pi->name);
                rows.push_back({m.encode_key(pi->name, xs), m.theory().from_json(r.at("upset"))});
            } else {
                auto xs = elems(r.at("args"), 0);
                if (xs.size() != pi->key_sorts.size())
                    throw FrameInconsistency("wrong number of arguments in a row of " + pi->name);
                if (!r.contains("value") || !r["value"].is_boolean())
                    throw SchemaError("row of " + pi->name + " needs a boolean value");
                if (r["value"].get<bool>())
                    trues.push_back(m.encode_key(pi->name, xs));
            }
        }
        for (auto &[k, u] : rows)
            m.set_row(pi->name, k, m.theory().join(m.row(pi->name, k), u));
        for (auto k : trues)
            m.set_truth(pi->name, k, true);
    }
    return m;
}

std::shared_ptr<const Problem> prepare(const std::string &text) {
    return std::make_shared<const Problem>(normalize_problem(parse_problem(text)));
}

} // namespace lchc
