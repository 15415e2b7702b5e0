#pragma once

#include <stdexcept>
#include <string>

namespace warpgraph {

/// Two fields, or a field and a metric, live on different grids.
class GridMismatch : public std::invalid_argument {
public:
    explicit GridMismatch(const std::string& where)
        : std::invalid_argument(where + ": operands live on different grids") {}
};

/// Input data violates a structural requirement (non-SPD metric, h <= 0, R >= 1, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation was called on data that does not satisfy its precondition
/// (unsolved state for an identity check, wrong sign of H, 2-D grid for a 3-D check).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Formula or configuration text could not be parsed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace warpgraph
