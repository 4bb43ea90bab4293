#include "core/parser.hpp"

#include <cctype>
#include <charconv>
#include <map>

#include "core/errors.hpp"

namespace rmpc {

namespace {

enum class Tok {
    End,
    Name,      // identifier
    Number,    // decimal literal
    Zero,      // "0" in term position (lexed as Number, classified by parser)
    LAngle,    // <
    RAngle,    // >
    LBrack,    // [
    RBrack,    // ]
    LParen,    // (
    RParen,    // )
    Comma,     // ,
    Dot,       // .
    Plus,      // +
    Equals,    // =
    ParOpen,   // |[
    ParClose,  // ]|
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1;
    int column = 1;
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

  private:
    void advance() {
        skip_trivia();
        current_.line = line_;
        current_.column = column_;
        if (pos_ >= src_.size()) {
            current_.kind = Tok::End;
            current_.text.clear();
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                bump();
            current_.kind = Tok::Name;
            current_.text = std::string(src_.substr(start, pos_ - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
            if (pos_ < src_.size() && src_[pos_] == '.' && pos_ + 1 < src_.size() &&
                std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
                bump();
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    bump();
            }
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                std::size_t mark = pos_;
                bump();
                if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) bump();
                if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                        bump();
                } else {
                    pos_ = mark;  // lone 'e' belongs to whatever follows
                }
            }
            current_.kind = Tok::Number;
            current_.text = std::string(src_.substr(start, pos_ - start));
            return;
        }
        switch (c) {
            case '<': single(Tok::LAngle); return;
            case '>': single(Tok::RAngle); return;
            case '(': single(Tok::LParen); return;
            case ')': single(Tok::RParen); return;
            case ',': single(Tok::Comma); return;
            case '.': single(Tok::Dot); return;
            case '+': single(Tok::Plus); return;
            case '=': single(Tok::Equals); return;
            case '|':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '[') {
                    bump();
                    bump();
                    current_.kind = Tok::ParOpen;
                    current_.text = "|[";
                    return;
                }
                throw ParseError("stray '|' (parallel is written '|[a,b]|')", line_, column_);
            case '[': single(Tok::LBrack); return;
            case ']':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '|') {
                    bump();
                    bump();
                    current_.kind = Tok::ParClose;
                    current_.text = "]|";
                    return;
                }
                single(Tok::RBrack);
                return;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", line_, column_);
        }
    }

    void single(Tok kind) {
        current_.kind = kind;
        current_.text = std::string(1, src_[pos_]);
        bump();
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') bump();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                bump();
            } else {
                break;
            }
        }
    }

    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    Token current_;
};

class Parser {
  public:
    Parser(std::string_view src, std::map<std::string, TermPtr>* defs)
        : lex_(src), defs_(defs) {}

    TermPtr parse_full_term() {
        TermPtr t = parse_parallel();
        expect_end();
        return t;
    }

    TermPtr parse_file() {
        while (lex_.peek().kind == Tok::Name && lex_.peek().text == "def") {
            lex_.take();
            Token name = expect(Tok::Name, "definition name");
            if (name.text == "def" || name.text == "system")
                throw ParseError("'" + name.text + "' is a reserved word", name.line, name.column);
            if (defs_->count(name.text))
                throw ParseError("redefinition of '" + name.text + "'", name.line, name.column);
            expect(Tok::Equals, "'='");
            pending_def_ = name.text;
            TermPtr body = parse_parallel();
            pending_def_.clear();
            (*defs_)[name.text] = body;
        }
        Token sys = expect(Tok::Name, "'system'");
        if (sys.text != "system")
            throw ParseError("expected 'system = <term>', found '" + sys.text + "'", sys.line,
                             sys.column);
        expect(Tok::Equals, "'='");
        TermPtr t = parse_parallel();
        expect_end();
        return t;
    }

    bool at_file_keyword() const {
        return lex_.peek().kind == Tok::Name &&
               (lex_.peek().text == "def" || lex_.peek().text == "system");
    }

  private:
    TermPtr parse_parallel() {
        TermPtr t = parse_choice();
        while (lex_.peek().kind == Tok::ParOpen) {
            lex_.take();
            std::vector<std::string> sync;
            if (lex_.peek().kind == Tok::Name) {
                sync.push_back(lex_.take().text);
                while (lex_.peek().kind == Tok::Comma) {
                    lex_.take();
                    sync.push_back(expect(Tok::Name, "action name").text);
                }
            }
            expect(Tok::ParClose, "']|'");
            t = parallel(t, parse_choice(), std::move(sync));
        }
        return t;
    }

    TermPtr parse_choice() {
        TermPtr t = parse_prefix();
        while (lex_.peek().kind == Tok::Plus) {
            lex_.take();
            t = choice(t, parse_prefix());
        }
        return t;
    }

    TermPtr parse_prefix() {
        const Token& tok = lex_.peek();
        switch (tok.kind) {
            case Tok::Number: {
                Token num = lex_.take();
                if (num.text == "0") return nil();
                throw ParseError("expected a term, found number '" + num.text + "'", num.line,
                                 num.column);
            }
            case Tok::LParen: {
                lex_.take();
                TermPtr t = parse_parallel();
                expect(Tok::RParen, "')'");
                return t;
            }
            case Tok::LAngle: {
                lex_.take();
                Token act = expect(Tok::Name, "action name");
                expect(Tok::Comma, "','");
                Token rate_tok = expect(Tok::Number, "rate");
                double rate = parse_rate(rate_tok);
                expect(Tok::RAngle, "'>'");
                std::optional<Key> key;
                if (lex_.peek().kind == Tok::LBrack) {
                    lex_.take();
                    Token key_tok = expect(Tok::Number, "key");
                    key = parse_key(key_tok);
                    expect(Tok::RBrack, "']'");
                }
                expect(Tok::Dot, "'.'");
                return prefix(act.text, rate, key, parse_prefix());
            }
            case Tok::Name: {
                Token name = lex_.take();
                if (name.text == pending_def_)
                    throw ParseError("recursive reference to '" + name.text + "'", name.line,
                                     name.column);
                if (defs_) {
                    auto it = defs_->find(name.text);
                    if (it != defs_->end()) return it->second;
                }
                throw ParseError("undefined name '" + name.text + "'", name.line, name.column);
            }
            default:
                throw ParseError("expected a term, found '" + describe(tok) + "'", tok.line,
                                 tok.column);
        }
    }

    double parse_rate(const Token& tok) {
        double value = 0.0;
        auto res = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
        if (res.ec != std::errc() || res.ptr != tok.text.data() + tok.text.size())
            throw ParseError("bad rate literal '" + tok.text + "'", tok.line, tok.column);
        if (!(value > 0.0))
            throw ParseError("rate must be positive, got '" + tok.text + "'", tok.line, tok.column);
        return value;
    }

    Key parse_key(const Token& tok) {
        unsigned long value = 0;
        auto res = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
        if (res.ec != std::errc() || res.ptr != tok.text.data() + tok.text.size())
            throw ParseError("bad key literal '" + tok.text + "' (keys are positive integers)",
                             tok.line, tok.column);
        if (value == 0)
            throw ParseError("keys are positive integers", tok.line, tok.column);
        return static_cast<Key>(value);
    }

    Token expect(Tok kind, const char* what) {
        const Token& tok = lex_.peek();
        if (tok.kind != kind)
            throw ParseError(std::string("expected ") + what + ", found '" + describe(tok) + "'",
                             tok.line, tok.column);
        return lex_.take();
    }

    void expect_end() {
        const Token& tok = lex_.peek();
        if (tok.kind != Tok::End)
            throw ParseError("unexpected trailing input '" + describe(tok) + "'", tok.line,
                             tok.column);
    }

    static std::string describe(const Token& tok) {
        return tok.kind == Tok::End ? "end of input" : tok.text;
    }

    Lexer lex_;
    std::map<std::string, TermPtr>* defs_;
    std::string pending_def_;
};

}  // namespace

TermPtr parse_term(std::string_view text) {
    Parser p(text, nullptr);
    return p.parse_full_term();
}

TermPtr parse_model(std::string_view text) {
    std::map<std::string, TermPtr> defs;
    Parser probe(text, &defs);
    if (probe.at_file_keyword()) return probe.parse_file();
    return probe.parse_full_term();
}

}  // namespace rmpc
