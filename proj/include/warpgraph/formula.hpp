#pragma once

#include "warpgraph/field.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace warpgraph {

enum class Symbol { x1, x2, x3, rho, theta };

struct FormulaVars {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;
    double rho = 0.0;
    double theta = 0.0;
};

/// Arithmetic expression over coordinates, compiled to postfix form.
///
/// Grammar: + - * / ^ (right-associative, binds tighter than unary minus),
/// parentheses, decimal literals, constants pi and e, functions sin cos exp ln
/// sqrt, and the symbols x1 x2 x3 rho theta (also written ρ θ). U+2212 is
/// accepted as a minus sign. Columns in errors count code points from 1.
class Formula {
public:
    Formula() = default;

    /// Parse with every symbol allowed.
    static Formula parse(std::string_view text);
    /// Parse, rejecting symbols outside `allowed` with a ParseError.
    static Formula parse(std::string_view text, std::span<const Symbol> allowed);

    double operator()(const FormulaVars& v) const;
    const std::string& text() const { return text_; }
    bool uses(Symbol s) const;

private:
    enum class Op : unsigned char { constant, variable, add, sub, mul, div, pow, neg, fn };
    enum class Fn : unsigned char { sin, cos, exp, ln, sqrt };
    struct Instr {
        Op op;
        unsigned char arg = 0;
        double value = 0.0;
    };
    friend class FormulaParser;

    std::string text_ = "0";
    std::vector<Instr> code_{Instr{Op::constant, 0, 0.0}};
};

/// Coordinates a formula may reference on a grid of this kind.
std::vector<Symbol> coordinate_symbols(GridKind kind);

/// Formula variables at a node: x1, x2(, x3) are Cartesian; rho, theta are the
/// polar coordinates on disks.
FormulaVars formula_vars(const FiberGrid& grid, std::size_t node);

ScalarField evaluate(const Formula& f, const GridPtr& grid);

std::string to_string(Symbol s);

}  // namespace warpgraph
