#include "lchc/sexpr.hpp"

#include <cctype>

namespace lchc {

ParseError::ParseError(Loc l, const std::string &msg, std::vector<std::string> exp)
    : std::runtime_error(l.str() + ": " + msg), loc(l), expected(std::move(exp)) {}

bool SExpr::is_int() const {
    if (!is_atom || atom.empty())
        return false;
    size_t i = (atom[0] == '-' || atom[0] == '+') ? 1 : 0;
    if (i == atom.size())
        return false;
    for (; i < atom.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(atom[i])))
            return false;
    return true;
}

std::string SExpr::str() const {
    if (is_atom)
        return atom;
    std::string s = "(";
    for (size_t i = 0; i < items.size(); ++i) {
        if (i)
            s += ' ';
        s += items[i]->str();
    }
    return s + ")";
}

namespace {

class Reader {
public:
    explicit Reader(const std::string &t) : text_(t) {}

    std::vector<SExprP> all() {
        std::vector<SExprP> out;
        skip();
        while (pos_ < text_.size()) {
            out.push_back(one());
            skip();
        }
        return out;
    }

    SExprP one() {
        skip();
        if (pos_ >= text_.size())
            throw ParseError(here(), "unexpected end of input", {"(", "atom"});
        Loc start = here();
        char c = text_[pos_];
        if (c == ')')
            throw ParseError(start, "unbalanced ')'", {"(", "atom"});
        auto e = std::make_shared<SExpr>();
        e->loc = start;
        if (c == '(') {
            e->is_atom = false;
            advance();
            for (;;) {
                skip();
                if (pos_ >= text_.size())
                    throw ParseError(here(), "missing ')' for list opened at " + start.str(), {")"});
                if (text_[pos_] == ')') {
                    advance();
                    break;
                }
                e->items.push_back(one());
            }
            return e;
        }
        while (pos_ < text_.size()) {
            char d = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';')
                break;
            e->atom += d;
            advance();
        }
        return e;
    }

private:
    Loc here() const { return {line_, col_}; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n')
                    advance();
            } else {
                break;
            }
        }
    }

    const std::string &text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

} // namespace

std::vector<SExprP> read_sexprs(const std::string &text) { return Reader(text).all(); }

SExprP read_sexpr(const std::string &text) {
    auto v = read_sexprs(text);
    if (v.size() != 1)
        throw ParseError({1, 1}, "expected exactly one expression, found " + std::to_string(v.size()));
    return v[0];
}

} // namespace lchc
