#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pnreach::smt {

/// S-expression as produced by SMT-LIB2 solvers. Quoted symbols are stored
/// without their bars.
struct SExpr {
    std::string atom;
    std::vector<SExpr> list;
    bool is_list = false;

    bool is_atom(std::string_view text) const { return !is_list && atom == text; }
};

/// Parses one complete s-expression. Throws pnreach::Error on malformed input.
SExpr parse_sexpr(std::string_view text);
std::vector<SExpr> parse_sexprs(std::string_view text);

/// Integer literal, possibly written (- n). Returns nullopt otherwise.
std::optional<long long> as_integer(const SExpr& e);

/// Number of unclosed parentheses in `text`, ignoring string literals,
/// quoted symbols and comments. Negative when there are too many closers.
int paren_balance(std::string_view text);

}  // namespace pnreach::smt
