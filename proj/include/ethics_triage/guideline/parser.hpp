#ifndef ETHICS_TRIAGE_GUIDELINE_PARSER_HPP
#define ETHICS_TRIAGE_GUIDELINE_PARSER_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "../detail/io.hpp"
#include "../error.hpp"
#include "tree.hpp"

namespace ethics_triage::guideline {

// Guideline source grammar:
//
//   file      := guideline+
//   guideline := 'guideline' STRING '{' ('subclass' STRING)* node '}'
//   node      := question | xor | condition | leaf
//   question  := 'question' STRING '{' branch+ '}'
//   xor       := 'xor' STRING '{' branch branch+ '}'
//   branch    := 'answer' STRING '->' node
//   condition := 'condition' STRING '->' node
//   leaf      := ('prohibit' | 'permit' | 'demand' | 'tbd') STRING? ('@' STRING)*
//
// Strings are double-quoted with \" and \\ escapes; '#' comments run to the
// end of the line.

namespace detail {

enum class Tok { Word, String, LBrace, RBrace, Arrow, At, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourcePos pos;
};

inline const char* describe(Tok kind) {
    switch (kind) {
    case Tok::Word: return "keyword";
    case Tok::String: return "string";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Arrow: return "'->'";
    case Tok::At: return "'@'";
    case Tok::End: return "end of input";
    }
    return "token";
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space();
        Token tok;
        tok.pos = {line_, col_};
        if (i_ >= src_.size()) {
            tok.kind = Tok::End;
            return tok;
        }
        const char c = src_[i_];
        if (c == '{' || c == '}' || c == '@') {
            tok.kind = c == '{' ? Tok::LBrace : c == '}' ? Tok::RBrace : Tok::At;
            tok.text = std::string(1, c);
            advance();
            return tok;
        }
        if (c == '-' && i_ + 1 < src_.size() && src_[i_ + 1] == '>') {
            tok.kind = Tok::Arrow;
            tok.text = "->";
            advance();
            advance();
            return tok;
        }
        if (c == '"') {
            tok.kind = Tok::String;
            advance();
            while (true) {
                if (i_ >= src_.size()) {
                    throw ParseError("unterminated string", tok.pos.line, tok.pos.column);
                }
                const char s = src_[i_];
                if (s == '"') {
                    advance();
                    break;
                }
                if (s == '\\') {
                    const SourcePos esc{line_, col_};
                    advance();
                    if (i_ >= src_.size() || (src_[i_] != '"' && src_[i_] != '\\')) {
                        throw ParseError("invalid escape sequence (only \\\" and \\\\ are allowed)", esc.line, esc.column);
                    }
                }
                tok.text += src_[i_];
                advance();
            }
            return tok;
        }
        if (is_word_char(c)) {
            tok.kind = Tok::Word;
            while (i_ < src_.size() && is_word_char(src_[i_])) {
                tok.text += src_[i_];
                advance();
            }
            return tok;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }

private:
    static bool is_word_char(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

    void advance() {
        if (src_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    void skip_space() {
        while (i_ < src_.size()) {
            const char c = src_[i_];
            if (c == '#') {
                while (i_ < src_.size() && src_[i_] != '\n') {
                    advance();
                }
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t i_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { look_ = lex_.next(); }

    std::vector<GuidelineTree> file() {
        if (look_.kind == Tok::End) {
            throw ParseError("empty guideline file", look_.pos.line, look_.pos.column);
        }
        std::vector<GuidelineTree> trees;
        while (look_.kind != Tok::End) {
            trees.push_back(guideline());
        }
        return trees;
    }

private:
    [[noreturn]] void fail(const std::string& message, const Token& at) const {
        throw ParseError(message, at.pos.line, at.pos.column);
    }

    [[noreturn]] void unexpected(const std::string& wanted) const {
        std::string got = describe(look_.kind);
        if (look_.kind == Tok::Word) {
            got = "'" + look_.text + "'";
        }
        fail("expected " + wanted + ", got " + got, look_);
    }

    Token take() {
        Token t = std::move(look_);
        look_ = lex_.next();
        return t;
    }

    Token expect(Tok kind) {
        if (look_.kind != kind) {
            unexpected(describe(kind));
        }
        return take();
    }

    bool at_word(std::string_view w) const { return look_.kind == Tok::Word && look_.text == w; }

    void expect_word(std::string_view w) {
        if (!at_word(w)) {
            unexpected("'" + std::string(w) + "'");
        }
        take();
    }

    GuidelineTree guideline() {
        GuidelineTree tree;
        tree.pos = look_.pos;
        expect_word("guideline");
        tree.name = expect(Tok::String).text;
        expect(Tok::LBrace);
        while (at_word("subclass")) {
            take();
            tree.subclasses.push_back(expect(Tok::String).text);
        }
        tree.root = node();
        expect(Tok::RBrace);
        return tree;
    }

    std::vector<Branch> branches() {
        std::vector<Branch> out;
        expect(Tok::LBrace);
        while (at_word("answer")) {
            take();
            Branch b;
            b.label = expect(Tok::String).text;
            expect(Tok::Arrow);
            b.child = node();
            out.push_back(std::move(b));
        }
        if (look_.kind != Tok::RBrace) {
            unexpected("'answer' or '}'");
        }
        take();
        return out;
    }

    NodePtr node() {
        if (look_.kind != Tok::Word) {
            unexpected("a node keyword");
        }
        const Token head = take();
        const std::string& kw = head.text;
        if (kw == "question" || kw == "xor") {
            std::string prompt = expect(Tok::String).text;
            auto bs = branches();
            if (kw == "question") {
                if (bs.empty()) {
                    fail("question needs at least one answer", head);
                }
                return make_question(std::move(prompt), std::move(bs), head.pos);
            }
            if (bs.size() < 2) {
                fail("xor needs at least two answers, got " + std::to_string(bs.size()), head);
            }
            return make_xor(std::move(prompt), std::move(bs), head.pos);
        }
        if (kw == "condition") {
            std::string note = expect(Tok::String).text;
            expect(Tok::Arrow);
            return make_condition(std::move(note), node(), head.pos);
        }
        VerdictKind kind;
        if (kw == "prohibit") {
            kind = VerdictKind::Prohibits;
        } else if (kw == "permit") {
            kind = VerdictKind::Permits;
        } else if (kw == "demand") {
            kind = VerdictKind::Demands;
        } else if (kw == "tbd") {
            kind = VerdictKind::Tbd;
        } else {
            fail("unknown node keyword '" + kw + "'", head);
        }
        std::string rationale;
        if (look_.kind == Tok::String) {
            rationale = take().text;
        }
        std::vector<std::string> citations;
        while (look_.kind == Tok::At) {
            take();
            citations.push_back(expect(Tok::String).text);
        }
        return make_leaf(kind, std::move(rationale), std::move(citations), head.pos);
    }

    Lexer lex_;
    Token look_;
};

} // namespace detail

inline std::vector<GuidelineTree> parse_guideline(std::string_view source) {
    return detail::Parser(source).file();
}

inline std::vector<GuidelineTree> load_guideline(const std::filesystem::path& path) {
    const std::string text = ethics_triage::detail::read_file(path);
    try {
        return parse_guideline(text);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.message(), e.line(), e.column());
    }
}

} // namespace ethics_triage::guideline

#endif
