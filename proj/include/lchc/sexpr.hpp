#ifndef LCHC_SEXPR_HPP
#define LCHC_SEXPR_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lchc {

struct Loc {
    int line = 0;
    int col = 0;
    std::string str() const { return std::to_string(line) + ":" + std::to_string(col); }
};

struct ParseError : std::runtime_error {
    Loc loc;
    std::vector<std::string> expected;
    ParseError(Loc l, const std::string &msg, std::vector<std::string> exp = {});
};

struct SExpr;
using SExprP = std::shared_ptr<const SExpr>;

struct SExpr {
    bool is_atom = true;
    std::string atom;
    std::vector<SExprP> items;
    Loc loc;

    bool is_list() const { return !is_atom; }
    bool is_int() const;
    bool head_is(const char *s) const {
        return !is_atom && !items.empty() && items[0]->is_atom && items[0]->atom == s;
    }
    std::string str() const;
};

/// Reads all top-level forms. Comments run from ';' to end of line.
std::vector<SExprP> read_sexprs(const std::string &text);
SExprP read_sexpr(const std::string &text);

} // namespace lchc

#endif
