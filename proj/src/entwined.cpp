#include "lchc/entwined.hpp"

#include <algorithm>

namespace lchc {

namespace {

constexpr uint64_t kIndexLimit = uint64_t(1) << 62;

// a * b, or nullopt past kIndexLimit
std::optional<uint64_t> mul(uint64_t a, uint64_t b) {
    if (a == 0 || b == 0)
        return 0;
    if (a > kIndexLimit / b)
        return std::nullopt;
    return a * b;
}

std::optional<uint64_t> power(uint64_t b, uint64_t e) {
    uint64_t r = 1;
    for (uint64_t i = 0; i < e; ++i) {
        auto n = mul(r, b);
        if (!n)
            return std::nullopt;
        r = *n;
        if (r == 0 || r == 1)
            return r;
    }
    return r;
}

uint64_t ipow(uint64_t b, uint64_t e) {
    uint64_t r = 1;
    for (uint64_t i = 0; i < e; ++i)
        r *= b;
    return r;
}

SortP rest_sort(const std::vector<SortP> &args, size_t from) {
    return s_arrows(std::vector<SortP>(args.begin() + static_cast<long>(from), args.end()), s_prop());
}

} // namespace

uint64_t Frame::slice(uint64_t e, uint64_t a, uint64_t rest_keys) const {
    if (k == K::Inactive) {
        uint64_t mask = rest_keys >= 64 ? ~uint64_t(0) : (uint64_t(1) << rest_keys) - 1;
        return (e >> (a * rest_keys)) & mask;
    }
    uint64_t b = target->size;
    return (e / ipow(b, a * rest_keys)) % ipow(b, rest_keys);
}

uint64_t Frame::digit(uint64_t e, uint64_t key) const {
    if (k == K::Inactive)
        return (e >> key) & 1;
    uint64_t b = target->size;
    return (e / ipow(b, key)) % b;
}

// ---------------------------------------------------------------- structure

Structure::Structure(std::shared_ptr<const Problem> p) : p_(std::move(p)), th_(*p_) {
    for (auto &[n, s] : p_->decls) {
        PredInfo pi;
        pi.name = n;
        pi.sort = s;
        pi.order = type_order(s);
        pi.args = sort_args(s);
        auto wp = w_position(s);
        pi.active = wp.has_value();
        pi.wpos = wp.value_or(pi.args.size());
        for (size_t i = 0; i < pi.args.size(); ++i)
            if (!pi.active || i != pi.wpos)
                pi.key_sorts.push_back(pi.args[i]);
        pi.npre = pi.active ? pi.wpos : pi.key_sorts.size();
        max_order_ = std::max(max_order_, pi.order);
        index_[n] = preds_.size();
        preds_.push_back(std::move(pi));
    }
    tables_.resize(preds_.size());
}

Structure::Structure(const Structure &o)
    : p_(o.p_), th_(o.th_), max_order_(o.max_order_), preds_(o.preds_), index_(o.index_), tables_(o.tables_) {}

Structure &Structure::operator=(const Structure &o) {
    if (this != &o) {
        p_ = o.p_;
        th_ = o.th_;
        max_order_ = o.max_order_;
        preds_ = o.preds_;
        index_ = o.index_;
        tables_ = o.tables_;
        frames_.clear();
    }
    return *this;
}

const PredInfo &Structure::pred(const std::string &name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw std::out_of_range("unknown predicate " + name);
    return preds_[it->second];
}

const Table &Structure::table(const std::string &pred) const {
    auto it = index_.find(pred);
    if (it == index_.end())
        throw std::out_of_range("unknown predicate " + pred);
    return tables_[it->second];
}

Upset Structure::row(const std::string &pred, uint64_t key) const {
    const Table &t = table(pred);
    auto it = t.rows.find(key);
    return it == t.rows.end() ? Upset{} : it->second;
}

bool Structure::truth(const std::string &pred, uint64_t key) const { return table(pred).trues.count(key) > 0; }

namespace {

void drop_frames(std::map<std::string, std::unique_ptr<Frame>> &frames, int from_order) {
    for (auto it = frames.begin(); it != frames.end();) {
        if (type_order(it->second->sort) >= from_order)
            it = frames.erase(it);
        else
            ++it;
    }
}

} // namespace

void Structure::set_row(const std::string &pred, uint64_t key, const Upset &u) {
    const PredInfo &pi = this->pred(pred);
    Table &t = tables_[index_.at(pred)];
    if (u.k == Upset::K::Empty)
        t.rows.erase(key);
    else
        t.rows[key] = u;
    drop_frames(frames_, pi.order);
}

void Structure::set_truth(const std::string &pred, uint64_t key, bool v) {
    const PredInfo &pi = this->pred(pred);
    Table &t = tables_[index_.at(pred)];
    if (v)
        t.trues.insert(key);
    else
        t.trues.erase(key);
    drop_frames(frames_, pi.order);
}

void Structure::set_lambda(const std::string &pred, std::shared_ptr<const Lambda> l) {
    const PredInfo &pi = this->pred(pred);
    Table &t = tables_[index_.at(pred)];
    t = Table{};
    t.lambda = std::move(l);
    drop_frames(frames_, pi.order);
}

void Structure::clear_table(const std::string &pred) {
    const PredInfo &pi = this->pred(pred);
    tables_[index_.at(pred)] = Table{};
    drop_frames(frames_, pi.order);
}

bool Structure::same_tables(const Structure &o) const { return tables_ == o.tables_; }

const Frame &Structure::frame(const SortP &s) const {
    std::string key = sort_str(s);
    auto it = frames_.find(key);
    if (it != frames_.end())
        return *it->second;
    auto f = build(s);
    const Frame &ref = *f;
    frames_[key] = std::move(f);
    return ref;
}

std::vector<const Frame *> Structure::key_frames(const PredInfo &pi) const {
    std::vector<const Frame *> r;
    for (auto &s : pi.key_sorts)
        r.push_back(&frame(s));
    return r;
}

namespace {

// product of frame sizes, nullopt when too large to index
std::optional<uint64_t> key_product(const std::vector<const Frame *> &fs) {
    uint64_t k = 1;
    for (auto *f : fs) {
        if (f->huge)
            return std::nullopt;
        auto n = mul(k, f->size);
        if (!n)
            return std::nullopt;
        k = *n;
    }
    return k;
}

} // namespace

std::unique_ptr<Frame> Structure::build(const SortP &s) const {
    auto f = std::make_unique<Frame>();
    f->sort = s;
    switch (s->k) {
    case Sort::K::Prop:
        f->k = Frame::K::Bool;
        f->size = 2;
        return f;
    case Sort::K::Fin:
        f->k = Frame::K::Fin;
        f->size = p_->fin_elems.size();
        return f;
    case Sort::K::W:
    case Sort::K::Num: throw std::logic_error("the sort W has no finite frame");
    case Sort::K::Arrow: break;
    }
    auto args = sort_args(s);
    auto wp = w_position(s);
    if (!wp) {
        f->k = Frame::K::Inactive;
        for (auto &a : args)
            f->args.push_back(&frame(a));
        auto k = key_product(f->args);
        if (!k || *k > 62) {
            f->huge = true;
            f->keys = k.value_or(0);
            return f;
        }
        f->keys = *k;
        f->size = uint64_t(1) << *k;
        return f;
    }
    if (*wp > 0) {
        f->k = Frame::K::Fun;
        for (size_t i = 0; i < *wp; ++i)
            f->args.push_back(&frame(args[i]));
        f->target = &frame(rest_sort(args, *wp));
        auto k = key_product(f->args);
        if (!k || f->target->huge) {
            f->huge = true;
            return f;
        }
        f->keys = *k;
        auto sz = power(f->target->size, *k);
        if (!sz)
            f->huge = true;
        else
            f->size = *sz;
        return f;
    }
    f->k = Frame::K::CaseII;
    for (size_t i = 1; i < args.size(); ++i)
        f->args.push_back(&frame(args[i]));
    auto k = key_product(f->args);
    if (!k || *k > kFrameCap)
        throw FrameTooLarge("frame of " + sort_str(s, p_->fin_name) + " has too many argument tuples");
    f->keys = *k;
    f->rows.push_back(std::vector<Upset>(*k, th_.all()));
    f->first_alias.push_back({"", 0});
    std::map<std::vector<Upset>, uint64_t> seen;
    seen[f->rows[0]] = 0;
    for (auto &pi : preds_) {
        if (!pi.active || pi.args.size() < args.size())
            continue;
        size_t off = pi.args.size() - args.size();
        if (off != pi.wpos)
            continue;
        bool match = true;
        for (size_t i = 0; i < args.size() && match; ++i)
            match = sort_eq(pi.args[off + i], args[i]);
        if (!match)
            continue;
        const Table &t = table(pi.name);
        if (t.lambda)
            throw FrameTooLarge("partial applications of " + pi.name + " are not tabulated");
        std::vector<const Frame *> pre;
        for (size_t i = 0; i < pi.wpos; ++i) {
            if (type_order(pi.args[i]) >= type_order(s))
                throw std::invalid_argument("predicate " + pi.name + " does not have an initial sort");
            pre.push_back(&frame(pi.args[i]));
        }
        auto pk = key_product(pre);
        if (!pk || *pk > kFrameCap || *pk * *k > kFrameCap * 4)
            throw FrameTooLarge("too many partial applications of " + pi.name);
        for (uint64_t a = 0; a < *pk; ++a) {
            std::vector<Upset> rv(*k);
            for (uint64_t b = 0; b < *k; ++b) {
                auto it = t.rows.find(a * *k + b);
                rv[b] = it == t.rows.end() ? Upset{} : it->second;
            }
            auto [sit, fresh] = seen.emplace(rv, f->rows.size());
            if (fresh) {
                f->rows.push_back(std::move(rv));
                f->first_alias.push_back({pi.name, a});
            }
            f->alias[{pi.name, a}] = sit->second;
        }
    }
    f->size = f->rows.size();
    return f;
}

uint64_t Structure::key_space(const std::string &pred) const {
    auto k = key_product(key_frames(this->pred(pred)));
    if (!k)
        throw FrameTooLarge("argument space of " + pred + " is too large");
    return *k;
}

std::vector<uint64_t> Structure::decode_key(const std::string &pred, uint64_t key) const {
    auto fs = key_frames(this->pred(pred));
    std::vector<uint64_t> r(fs.size());
    for (size_t i = fs.size(); i-- > 0;) {
        r[i] = key % fs[i]->size;
        key /= fs[i]->size;
    }
    return r;
}

uint64_t Structure::encode_key(const std::string &pred, const std::vector<uint64_t> &elems) const {
    auto fs = key_frames(this->pred(pred));
    if (elems.size() != fs.size())
        throw std::logic_error("key of the wrong length for " + pred);
    uint64_t k = 0;
    for (size_t i = 0; i < fs.size(); ++i) {
        if (fs[i]->huge)
            throw FrameTooLarge("argument frame of " + pred + " is too large");
        k = k * fs[i]->size + elems[i];
    }
    return k;
}

uint64_t Structure::partial_elem(const std::string &pred, const std::vector<uint64_t> &elems) const {
    const PredInfo &pi = this->pred(pred);
    const Table &t = table(pred);
    if (t.lambda)
        throw FrameTooLarge("partial application of " + pred + " is not tabulated");
    auto fs = key_frames(pi);
    size_t m = elems.size();
    uint64_t prefix = 0;
    for (size_t i = 0; i < m; ++i)
        prefix = prefix * fs[i]->size + elems[i];
    std::vector<const Frame *> rest_fs(fs.begin() + static_cast<long>(m), fs.end());
    if (!pi.active) {
        auto r = key_product(rest_fs);
        if (!r || *r > 62)
            throw FrameTooLarge("partial application of " + pred + " denotes too large a table");
        uint64_t bits = 0;
        for (uint64_t i = 0; i < *r; ++i)
            if (t.trues.count(prefix * *r + i))
                bits |= uint64_t(1) << i;
        return bits;
    }
    if (m > pi.npre)
        throw std::logic_error("partial application past the W argument");
    const Frame &target = frame(rest_sort(pi.args, pi.wpos));
    if (m == pi.npre) {
        auto it = target.alias.find({pred, prefix});
        if (it == target.alias.end())
            throw FrameInconsistency("no frame element for a partial application of " + pred);
        return it->second;
    }
    std::vector<const Frame *> pre_rest(fs.begin() + static_cast<long>(m), fs.begin() + static_cast<long>(pi.npre));
    auto r = key_product(pre_rest);
    const Frame &fun = frame(rest_sort(pi.args, m));
    if (!r || fun.huge)
        throw FrameTooLarge("partial application of " + pred + " denotes too large a function");
    uint64_t e = 0, place = 1;
    for (uint64_t i = 0; i < *r; ++i) {
        auto it = target.alias.find({pred, prefix * *r + i});
        if (it == target.alias.end())
            throw FrameInconsistency("no frame element for a partial application of " + pred);
        e += it->second * place;
        place *= target.size;
    }
    return e;
}

// ---------------------------------------------------------------- names

nlohmann::json Structure::canon(const Frame &f, uint64_t e) const {
    using nlohmann::json;
    switch (f.k) {
    case Frame::K::Bool: return {{"bool", e == 1}};
    case Frame::K::Fin: return {{"s", p_->fin_elems.at(e)}};
    case Frame::K::CaseII: {
        if (e == 0)
            return {{"top", sort_str(f.sort, p_->fin_name)}};
        auto [pred, pk] = f.first_alias.at(e);
        const PredInfo &pi = this->pred(pred);
        json app = json::array({pred});
        std::vector<const Frame *> pre;
        for (size_t i = 0; i < pi.wpos; ++i)
            pre.push_back(&frame(pi.args[i]));
        std::vector<uint64_t> digits(pre.size());
        for (size_t i = pre.size(); i-- > 0;) {
            digits[i] = pk % pre[i]->size;
            pk /= pre[i]->size;
        }
        for (size_t i = 0; i < pre.size(); ++i)
            app.push_back(canon(*pre[i], digits[i]));
        return {{"app", app}};
    }
    case Frame::K::Fun: {
        if (e == 0)
            return {{"top", sort_str(f.sort, p_->fin_name)}};
        json d = json::array();
        for (uint64_t k = 0; k < f.keys; ++k)
            d.push_back(canon(*f.target, f.digit(e, k)));
        return {{"fun", d}};
    }
    case Frame::K::Inactive: {
        json set = json::array();
        for (uint64_t k = 0; k < f.keys; ++k) {
            if (!f.digit(e, k))
                continue;
            json tuple = json::array();
            uint64_t rem = k;
            std::vector<uint64_t> digits(f.args.size());
            for (size_t i = f.args.size(); i-- > 0;) {
                digits[i] = rem % f.args[i]->size;
                rem /= f.args[i]->size;
            }
            for (size_t i = 0; i < f.args.size(); ++i)
                tuple.push_back(canon(*f.args[i], digits[i]));
            set.push_back(tuple);
        }
        return {{"set", set}};
    }
    }
    return {};
}

uint64_t Structure::from_canon(const Frame &f, const nlohmann::json &j) const {
    if (!j.is_object() || j.size() != 1)
        throw SchemaError("malformed value " + j.dump());
    const std::string &tag = j.begin().key();
    const auto &v = j.begin().value();
    if (f.huge)
        throw FrameTooLarge("frame of " + sort_str(f.sort, p_->fin_name) + " is too large");
    switch (f.k) {
    case Frame::K::Bool:
        if (tag != "bool" || !v.is_boolean())
            throw SchemaError("expected a boolean value, found " + j.dump());
        return v.get<bool>() ? 1 : 0;
    case Frame::K::Fin: {
        if (tag != "s" || !v.is_string())
            throw SchemaError("expected a finite constant, found " + j.dump());
        int i = p_->fin_index(v.get<std::string>());
        if (i < 0)
            throw SchemaError("unknown constant " + v.dump());
        return static_cast<uint64_t>(i);
    }
    default: break;
    }
    if (tag == "top") {
        if (f.k == Frame::K::Inactive)
            return f.keys >= 64 ? ~uint64_t(0) : (uint64_t(1) << f.keys) - 1;
        return 0;
    }
    if (tag == "app") {
        if (!v.is_array() || v.empty() || !v[0].is_string())
            throw SchemaError("malformed application " + j.dump());
        std::string pred = v[0];
        if (!has_pred(pred))
            throw SchemaError("unknown predicate " + pred);
        const PredInfo &pi = this->pred(pred);
        std::vector<uint64_t> elems;
        if (v.size() - 1 > pi.key_sorts.size())
            throw FrameInconsistency("too many arguments for " + pred);
        for (size_t i = 1; i < v.size(); ++i)
            elems.push_back(from_canon(frame(pi.key_sorts[i - 1]), v[i]));
        SortP rest = rest_sort(pi.args, elems.size());
        if (!sort_eq(rest, f.sort))
            throw FrameInconsistency("application of " + pred + " has the wrong sort");
        return partial_elem(pred, elems);
    }
    if (tag == "fun" && f.k == Frame::K::Fun) {
        if (!v.is_array() || v.size() != f.keys)
            throw FrameInconsistency("function table of the wrong length");
        uint64_t e = 0, place = 1;
        for (auto &d : v) {
            e += from_canon(*f.target, d) * place;
            place *= f.target->size;
        }
        return e;
    }
    if (tag == "set" && f.k == Frame::K::Inactive) {
        if (!v.is_array())
            throw SchemaError("malformed set " + j.dump());
        uint64_t e = 0;
        for (auto &t : v) {
            if (!t.is_array() || t.size() != f.args.size())
                throw FrameInconsistency("set element of the wrong arity");
            uint64_t k = 0;
            for (size_t i = 0; i < f.args.size(); ++i)
                k = k * f.args[i]->size + from_canon(*f.args[i], t[i]);
            e |= uint64_t(1) << k;
        }
        return e;
    }
    throw SchemaError("value " + j.dump() + " does not fit the sort " + sort_str(f.sort, p_->fin_name));
}

std::string Structure::elem_str(const Frame &f, uint64_t e) const { return canon(f, e).dump(); }

} // namespace lchc
