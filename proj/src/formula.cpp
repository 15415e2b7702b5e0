#include "warpgraph/formula.hpp"

#include "warpgraph/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace warpgraph {

std::string to_string(Symbol s) {
    switch (s) {
    case Symbol::x1: return "x1";
    case Symbol::x2: return "x2";
    case Symbol::x3: return "x3";
    case Symbol::rho: return "rho";
    case Symbol::theta: return "theta";
    }
    return "?";
}

class FormulaParser {
public:
    FormulaParser(std::string_view text, std::span<const Symbol> allowed)
        : text_(text), allowed_(allowed) {}

    Formula run() {
        Formula f;
        f.text_ = std::string(text_);
        f.code_.clear();
        code_ = &f.code_;
        skip_space();
        if (pos_ >= text_.size()) {
            fail("empty formula");
        }
        expr();
        skip_space();
        if (pos_ < text_.size()) {
            fail("unexpected '" + current_char() + "'");
        }
        return f;
    }

private:
    using Op = Formula::Op;
    using Fn = Formula::Fn;

    [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_); }

    [[noreturn]] void fail_at(const std::string& msg, std::size_t byte) const {
        int col = 1;
        for (std::size_t i = 0; i < byte && i < text_.size(); ++i) {
            // count code points, skipping UTF-8 continuation bytes
            if ((static_cast<unsigned char>(text_[i]) & 0xC0) != 0x80) {
                ++col;
            }
        }
        throw ParseError("formula '" + std::string(text_) + "': " + msg, 1, col);
    }

    std::string current_char() const {
        std::size_t n = 1;
        while (pos_ + n < text_.size() &&
               (static_cast<unsigned char>(text_[pos_ + n]) & 0xC0) == 0x80) {
            ++n;
        }
        return std::string(text_.substr(pos_, n));
    }

    void skip_space() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
            ++pos_;
        }
    }

    bool eat(std::string_view tok) {
        skip_space();
        if (text_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    bool eat_minus() { return eat("-") || eat("\xE2\x88\x92"); }

    void emit(Op op, unsigned char arg = 0, double value = 0.0) {
        code_->push_back(Formula::Instr{op, arg, value});
    }

    void expr() {
        term();
        for (;;) {
            if (eat("+")) {
                term();
                emit(Op::add);
            } else if (eat_minus()) {
                term();
                emit(Op::sub);
            } else {
                return;
            }
        }
    }

    void term() {
        unary();
        for (;;) {
            if (eat("*")) {
                unary();
                emit(Op::mul);
            } else if (eat("/")) {
                unary();
                emit(Op::div);
            } else {
                return;
            }
        }
    }

    void unary() {
        if (eat_minus()) {
            unary();
            emit(Op::neg);
        } else if (eat("+")) {
            unary();
        } else {
            power();
        }
    }

    void power() {
        primary();
        if (eat("^")) {
            unary();
            emit(Op::pow);
        }
    }

    static bool ident_start(unsigned char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
    }
    static bool ident_char(unsigned char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

    void primary() {
        skip_space();
        if (pos_ >= text_.size()) {
            fail("unexpected end of formula");
        }
        const auto c = static_cast<unsigned char>(text_[pos_]);
        if (c == '(') {
            ++pos_;
            expr();
            if (!eat(")")) {
                fail("expected ')'");
            }
            return;
        }
        if ((c >= '0' && c <= '9') || c == '.') {
            number();
            return;
        }
        if (ident_start(c)) {
            identifier();
            return;
        }
        fail("unexpected '" + current_char() + "'");
    }

    void number() {
        double v = 0.0;
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || !std::isfinite(v)) {
            fail("malformed number");
        }
        pos_ += static_cast<std::size_t>(ptr - first);
        emit(Op::constant, 0, v);
    }

    void identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);

        static constexpr std::pair<std::string_view, Fn> functions[] = {
            {"sin", Fn::sin}, {"cos", Fn::cos}, {"exp", Fn::exp}, {"ln", Fn::ln},
            {"sqrt", Fn::sqrt}};
        for (const auto& [fname, fn] : functions) {
            if (name == fname) {
                if (!eat("(")) {
                    fail("expected '(' after " + std::string(fname));
                }
                expr();
                if (!eat(")")) {
                    fail("expected ')'");
                }
                emit(Op::fn, static_cast<unsigned char>(fn));
                return;
            }
        }
        if (name == "pi" || name == "\xCF\x80") {
            emit(Op::constant, 0, std::numbers::pi);
            return;
        }
        if (name == "e") {
            emit(Op::constant, 0, std::numbers::e);
            return;
        }
        static constexpr std::pair<std::string_view, Symbol> symbols[] = {
            {"x1", Symbol::x1},       {"x2", Symbol::x2},         {"x3", Symbol::x3},
            {"rho", Symbol::rho},     {"\xCF\x81", Symbol::rho},  {"theta", Symbol::theta},
            {"\xCE\xB8", Symbol::theta}};
        for (const auto& [sname, sym] : symbols) {
            if (name == sname) {
                if (std::find(allowed_.begin(), allowed_.end(), sym) == allowed_.end()) {
                    fail_at("symbol '" + std::string(name) + "' is not a coordinate of this fiber",
                            start);
                }
                emit(Op::variable, static_cast<unsigned char>(sym));
                return;
            }
        }
        fail_at("unknown symbol '" + std::string(name) + "'", start);
    }

    std::string_view text_;
    std::span<const Symbol> allowed_;
    std::size_t pos_ = 0;
    std::vector<Formula::Instr>* code_ = nullptr;
};

Formula Formula::parse(std::string_view text) {
    static constexpr Symbol all[] = {Symbol::x1, Symbol::x2, Symbol::x3, Symbol::rho,
                                     Symbol::theta};
    return parse(text, all);
}

Formula Formula::parse(std::string_view text, std::span<const Symbol> allowed) {
    return FormulaParser(text, allowed).run();
}

bool Formula::uses(Symbol s) const {
    return std::any_of(code_.begin(), code_.end(), [s](const Instr& i) {
        return i.op == Op::variable && i.arg == static_cast<unsigned char>(s);
    });
}

double Formula::operator()(const FormulaVars& v) const {
    double stack[64] = {};
    std::size_t top = 0;
    std::vector<double> spill;  // deep expressions only
    double* st = stack;
    if (code_.size() > 64) {
        spill.resize(code_.size());
        st = spill.data();
    }
    for (const Instr& in : code_) {
        switch (in.op) {
        case Op::constant: st[top++] = in.value; break;
        case Op::variable:
            switch (static_cast<Symbol>(in.arg)) {
            case Symbol::x1: st[top++] = v.x1; break;
            case Symbol::x2: st[top++] = v.x2; break;
            case Symbol::x3: st[top++] = v.x3; break;
            case Symbol::rho: st[top++] = v.rho; break;
            case Symbol::theta: st[top++] = v.theta; break;
            }
            break;
        case Op::add: --top; st[top - 1] += st[top]; break;
        case Op::sub: --top; st[top - 1] -= st[top]; break;
        case Op::mul: --top; st[top - 1] *= st[top]; break;
        case Op::div: --top; st[top - 1] /= st[top]; break;
        case Op::pow: --top; st[top - 1] = std::pow(st[top - 1], st[top]); break;
        case Op::neg: st[top - 1] = -st[top - 1]; break;
        case Op::fn: {
            double& x = st[top - 1];
            switch (static_cast<Fn>(in.arg)) {
            case Fn::sin: x = std::sin(x); break;
            case Fn::cos: x = std::cos(x); break;
            case Fn::exp: x = std::exp(x); break;
            case Fn::ln: x = std::log(x); break;
            case Fn::sqrt: x = std::sqrt(x); break;
            }
            break;
        }
        }
    }
    return st[0];
}

std::vector<Symbol> coordinate_symbols(GridKind kind) {
    switch (kind) {
    case GridKind::torus2d:
    case GridKind::box2d: return {Symbol::x1, Symbol::x2};
    case GridKind::torus3d_lifted:
    case GridKind::box3d_lifted: return {Symbol::x1, Symbol::x2, Symbol::x3};
    case GridKind::disk_polar: return {Symbol::x1, Symbol::x2, Symbol::rho, Symbol::theta};
    }
    return {};
}

FormulaVars formula_vars(const FiberGrid& grid, std::size_t node) {
    const Point c = grid.cartesian(node);
    FormulaVars v{c[0], c[1], c[2], 0.0, 0.0};
    if (grid.kind() == GridKind::disk_polar) {
        const Point polar = grid.coords(node);
        v.rho = polar[0];
        v.theta = polar[1];
    }
    return v;
}

ScalarField evaluate(const Formula& f, const GridPtr& grid) {
    return ScalarField::from_function(
        grid, [&](const FiberGrid& g, std::size_t p) { return f(formula_vars(g, p)); });
}

}  // namespace warpgraph
