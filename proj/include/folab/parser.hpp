#pragma once

#include <cctype>
#include <fstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "formula.hpp"

namespace folab {

namespace detail {

enum class Tok {
    LParen, RParen, Comma, Dot, Eq, Bang, Amp, Pipe, Arrow, Le, Gt,
    Var,      // [a-z][a-z0-9]*, not a keyword
    Rel,      // [A-Z][A-Za-z0-9_]*, not Qm
    Int,
    KwExists, KwForall, KwQm, KwTrue, KwFalse, KwDist,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    long value = 0;
    size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            size_t at = i_;
            if (i_ >= src_.size()) {
                out.push_back({Tok::End, "", 0, at});
                return out;
            }
            char c = src_[i_];
            if (c == '(') { ++i_; out.push_back({Tok::LParen, "(", 0, at}); continue; }
            if (c == ')') { ++i_; out.push_back({Tok::RParen, ")", 0, at}); continue; }
            if (c == ',') { ++i_; out.push_back({Tok::Comma, ",", 0, at}); continue; }
            if (c == '.') { ++i_; out.push_back({Tok::Dot, ".", 0, at}); continue; }
            if (c == '=') { ++i_; out.push_back({Tok::Eq, "=", 0, at}); continue; }
            if (c == '!') { ++i_; out.push_back({Tok::Bang, "!", 0, at}); continue; }
            if (c == '&') { ++i_; out.push_back({Tok::Amp, "&", 0, at}); continue; }
            if (c == '|') { ++i_; out.push_back({Tok::Pipe, "|", 0, at}); continue; }
            if (c == '>') { ++i_; out.push_back({Tok::Gt, ">", 0, at}); continue; }
            if (c == '<') {
                if (i_ + 1 < src_.size() && src_[i_ + 1] == '=') {
                    i_ += 2;
                    out.push_back({Tok::Le, "<=", 0, at});
                    continue;
                }
                fail(ErrorKind::Parse, err_at("expected '<='", at));
            }
            if (c == '-') {
                if (i_ + 1 < src_.size() && src_[i_ + 1] == '>') {
                    i_ += 2;
                    out.push_back({Tok::Arrow, "->", 0, at});
                    continue;
                }
                fail(ErrorKind::Parse, err_at("expected '->'", at));
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                long v = 0;
                size_t start = i_;
                while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
                    v = v * 10 + (src_[i_] - '0');
                    if (v > 1'000'000) fail(ErrorKind::Parse, err_at("integer literal too large", start));
                    ++i_;
                }
                out.push_back({Tok::Int, src_.substr(start, i_ - start), v, at});
                continue;
            }
            if (std::islower(static_cast<unsigned char>(c))) {
                size_t start = i_;
                while (i_ < src_.size() && (std::islower(static_cast<unsigned char>(src_[i_])) ||
                                            std::isdigit(static_cast<unsigned char>(src_[i_]))))
                    ++i_;
                std::string w = src_.substr(start, i_ - start);
                Tok k = Tok::Var;
                if (w == "exists") k = Tok::KwExists;
                else if (w == "forall") k = Tok::KwForall;
                else if (w == "true") k = Tok::KwTrue;
                else if (w == "false") k = Tok::KwFalse;
                else if (w == "dist") k = Tok::KwDist;
                out.push_back({k, w, 0, at});
                continue;
            }
            if (std::isupper(static_cast<unsigned char>(c))) {
                size_t start = i_;
                while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
                    ++i_;
                std::string w = src_.substr(start, i_ - start);
                out.push_back({w == "Qm" ? Tok::KwQm : Tok::Rel, w, 0, at});
                continue;
            }
            fail(ErrorKind::Parse, err_at(std::string("unexpected character '") + c + "'", at));
        }
    }

private:
    void skip_space() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    }
    std::string err_at(const std::string& what, size_t at) {
        return what + " at position " + std::to_string(at);
    }
    const std::string& src_;
    size_t i_ = 0;
};

class Parser {
public:
    explicit Parser(const std::string& src) : src_(src), toks_(Lexer(src).run()) {}

    FormulaPtr run() {
        FormulaPtr f = formula();
        expect(Tok::End, "trailing input after formula");
        return f;
    }

private:
    const Token& cur() const { return toks_[i_]; }
    const Token& take() { return toks_[i_++]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool eat(Tok k) {
        if (!at(k)) return false;
        ++i_;
        return true;
    }
    void expect(Tok k, const std::string& what) {
        if (!eat(k)) fail(ErrorKind::Parse, what + " at position " + std::to_string(cur().pos));
    }
    [[noreturn]] void bail(const std::string& what) {
        fail(ErrorKind::Parse, what + " at position " + std::to_string(cur().pos));
    }

    FormulaPtr formula() { return implication(); }

    FormulaPtr implication() {
        FormulaPtr lhs = disjunction();
        if (eat(Tok::Arrow)) return f_implies(std::move(lhs), implication());
        return lhs;
    }

    FormulaPtr disjunction() {
        FormulaPtr acc = conjunction();
        while (eat(Tok::Pipe)) acc = f_or(std::move(acc), conjunction());
        return acc;
    }

    FormulaPtr conjunction() {
        FormulaPtr acc = negation();
        while (eat(Tok::Amp)) acc = f_and(std::move(acc), negation());
        return acc;
    }

    FormulaPtr negation() {
        if (eat(Tok::Bang)) return f_not(negation());
        return primary();
    }

    FormulaPtr primary() {
        if (eat(Tok::LParen)) {
            FormulaPtr f = formula();
            expect(Tok::RParen, "unbalanced parentheses: expected ')'");
            return f;
        }
        if (at(Tok::KwExists) || at(Tok::KwForall) || at(Tok::KwQm)) {
            Tok q = take().kind;
            if (!at(Tok::Var)) bail("expected a variable after quantifier");
            std::string v = take().text;
            expect(Tok::Dot, "expected '.' after quantified variable");
            FormulaPtr body = formula(); // quantifier body extends maximally right
            if (q == Tok::KwExists) return f_exists(std::move(v), std::move(body));
            if (q == Tok::KwForall) return f_forall(std::move(v), std::move(body));
            return f_qm(std::move(v), std::move(body));
        }
        return atom();
    }

    FormulaPtr atom() {
        if (eat(Tok::KwTrue)) return f_true();
        if (eat(Tok::KwFalse)) return f_false();
        if (at(Tok::KwDist)) {
            take();
            bool beyond;
            if (eat(Tok::Le)) beyond = false;
            else if (eat(Tok::Gt)) beyond = true;
            else bail("expected '<=' or '>' after dist");
            if (!at(Tok::Int)) bail("expected a radius after dist comparator");
            long r = take().value;
            expect(Tok::LParen, "expected '(' in distance atom");
            if (!at(Tok::Var)) bail("expected a variable in distance atom");
            std::string a = take().text;
            expect(Tok::Comma, "expected ',' in distance atom");
            if (!at(Tok::Var)) bail("expected a variable in distance atom");
            std::string b = take().text;
            expect(Tok::RParen, "unbalanced parentheses: expected ')' in distance atom");
            return beyond ? f_dist_gt(a, b, static_cast<int>(r)) : f_dist_le(a, b, static_cast<int>(r));
        }
        if (at(Tok::Rel)) {
            std::string name = take().text;
            expect(Tok::LParen, "expected '(' after relation symbol " + name);
            std::vector<std::string> args;
            do {
                if (!at(Tok::Var)) bail("expected a variable in argument list of " + name);
                args.push_back(take().text);
            } while (eat(Tok::Comma));
            expect(Tok::RParen, "unbalanced parentheses: expected ')' after arguments of " + name);
            return f_rel(std::move(name), std::move(args));
        }
        if (at(Tok::Var)) {
            std::string a = take().text;
            expect(Tok::Eq, "expected '=' after variable " + a);
            if (!at(Tok::Var)) bail("expected a variable after '='");
            return f_eq(a, take().text);
        }
        bail("expected a formula");
    }

    std::string src_;
    std::vector<Token> toks_;
    size_t i_ = 0;
};

} // namespace detail

inline FormulaPtr parse_formula(const std::string& text) { return detail::Parser(text).run(); }

struct NamedFormula {
    std::string id;   // f0, f1, ... by position in the file
    std::string text; // source line with comments stripped
    FormulaPtr formula;
};

// One formula per line; '#' starts a comment; blank lines skipped.
inline std::vector<NamedFormula> parse_formula_lines(std::istream& in) {
    std::vector<NamedFormula> out;
    std::string line;
    while (std::getline(in, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t a = line.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r\n");
        std::string text = line.substr(a, b - a + 1);
        NamedFormula nf;
        nf.id = "f" + std::to_string(out.size());
        nf.text = text;
        try {
            nf.formula = parse_formula(text);
        } catch (const Error& e) {
            fail(e.kind(), "formula " + nf.id + " (\"" + text + "\"): " + e.what());
        }
        out.push_back(std::move(nf));
    }
    return out;
}

inline std::vector<NamedFormula> load_formula_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Usage, "cannot open formula file " + path);
    return parse_formula_lines(in);
}

} // namespace folab
