#ifndef LCHC_TYPESYS_HPP
#define LCHC_TYPESYS_HPP

#include "lchc/syntax.hpp"

#include <map>
#include <string>
#include <vector>

namespace lchc {

struct TypeError : std::runtime_error {
    Loc loc;
    std::string term, expected, actual;
    TypeError(Loc l, std::string term, std::string expected, std::string actual);
};

struct UnboundVariable : std::runtime_error {
    Loc loc;
    UnboundVariable(Loc l, const std::string &name);
};

using Env = std::map<std::string, SortP>;

/// Sort of a term under the application rule. Integer literals and tuple
/// components have sort Num unless the dimension is 1, where they are W.
SortP infer_sort(const TermP &t, const Env &env, const Problem &p);

int type_order(const SortP &s);

struct InitialCheck {
    bool ok = true;
    std::string condition; // "O1", "O2", "O3" or "relational"
    size_t position = 0;   // 1-based argument position of the failure
    std::string detail;
};

InitialCheck is_initial(const SortP &s);

enum class Activity { Active, Inactive, NonRelational };

struct TypeClass {
    int order = 0;
    bool initial = false;
    Activity activity = Activity::NonRelational;
};

TypeClass classify(const SortP &s);
bool is_active(const SortP &s);

enum class Mode { FirstOrder, InitialHigherOrder, Rejected };

struct ValidationReport {
    Mode mode = Mode::Rejected;
    int max_order = 0;
    std::map<std::string, TypeClass> preds;
    std::vector<std::string> violations;
    std::vector<std::string> inserted_limits;

    bool ok() const { return mode != Mode::Rejected; }
    std::string text() const;
    std::string json() const;
};

const char *mode_name(Mode m);

/// Validates a normalized problem. Never throws for ill-formed problems;
/// every violation is listed in the report.
ValidationReport validate(const Problem &p);

} // namespace lchc

#endif
