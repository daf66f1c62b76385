#include "pnreach/sexpr.hpp"

#include <cctype>
#include <charconv>

#include "pnreach/error.hpp"

namespace pnreach::smt {

namespace {

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    bool at_end() {
        skip();
        return pos_ >= text_.size();
    }

    SExpr read() {
        skip();
        if (pos_ >= text_.size()) throw Error("unexpected end of s-expression");
        char c = text_[pos_];
        if (c == ')') throw Error("unexpected ')'");
        if (c == '(') {
            ++pos_;
            SExpr e;
            e.is_list = true;
            for (;;) {
                skip();
                if (pos_ >= text_.size()) throw Error("unterminated list");
                if (text_[pos_] == ')') {
                    ++pos_;
                    return e;
                }
                e.list.push_back(read());
            }
        }
        SExpr e;
        if (c == '|') {
            auto end = text_.find('|', pos_ + 1);
            if (end == std::string_view::npos) throw Error("unterminated quoted symbol");
            e.atom = std::string(text_.substr(pos_ + 1, end - pos_ - 1));
            pos_ = end + 1;
            return e;
        }
        if (c == '"') {
            std::size_t i = pos_ + 1;
            std::string value = "\"";
            for (;;) {
                if (i >= text_.size()) throw Error("unterminated string literal");
                if (text_[i] == '"') {
                    if (i + 1 < text_.size() && text_[i + 1] == '"') {
                        value += "\"\"";
                        i += 2;
                        continue;
                    }
                    break;
                }
                value += text_[i++];
            }
            e.atom = value + "\"";
            pos_ = i + 1;
            return e;
        }
        std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
               text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ';')
            ++pos_;
        e.atom = std::string(text_.substr(start, pos_ - start));
        return e;
    }

private:
    void skip() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

SExpr parse_sexpr(std::string_view text) {
    Reader r(text);
    SExpr e = r.read();
    if (!r.at_end()) throw Error("trailing input after s-expression");
    return e;
}

std::vector<SExpr> parse_sexprs(std::string_view text) {
    Reader r(text);
    std::vector<SExpr> out;
    while (!r.at_end()) out.push_back(r.read());
    return out;
}

std::optional<long long> as_integer(const SExpr& e) {
    if (e.is_list) {
        if (e.list.size() == 2 && e.list[0].is_atom("-")) {
            auto inner = as_integer(e.list[1]);
            if (inner) return -*inner;
        }
        return std::nullopt;
    }
    long long value = 0;
    const char* begin = e.atom.data();
    const char* end = begin + e.atom.size();
    if (begin == end || !std::isdigit(static_cast<unsigned char>(*begin))) return std::nullopt;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

int paren_balance(std::string_view text) {
    int depth = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == ';') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == '|') {
            auto end = text.find('|', i + 1);
            if (end == std::string_view::npos) return depth + 1;
            i = end;
        } else if (c == '"') {
            ++i;
            while (i < text.size()) {
                if (text[i] == '"') {
                    if (i + 1 < text.size() && text[i + 1] == '"') {
                        i += 2;
                        continue;
                    }
                    break;
                }
                ++i;
            }
            if (i >= text.size()) return depth + 1;
        } else if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        }
    }
    return depth;
}

}  // namespace pnreach::smt
