#pragma once

#include <stdexcept>
#include <string>

namespace pnreach {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `where` names the element id or line number.
class ParseError : public Error {
public:
    ParseError(std::string where, const std::string& what)
        : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

class NotEnabledError : public Error {
public:
    using Error::Error;
};

/// Raised by the solver layer: spawn failures, protocol errors, use of a dead session.
class SolverError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace pnreach
