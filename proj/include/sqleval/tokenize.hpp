#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "sqleval/error.hpp"

namespace sqleval {

enum class TokKind { keyword, identifier, literal, punct };

struct SqlToken {
    TokKind kind;
    std::string text;  // keywords normalized to uppercase
    size_t begin = 0;  // source span [begin, end)
    size_t end = 0;
    int depth = 0;  // parenthesis nesting depth at the token
};

struct SqlTokenStream {
    std::vector<SqlToken> tokens;
};

namespace detail {

// Only the constructs the difficulty and statistics rules inspect are
// promoted to keyword tokens; every other word is an identifier.
inline bool is_tracked_keyword(std::string_view upper) {
    static constexpr std::array<std::string_view, 13> kw = {
        "SELECT", "WHERE", "LIMIT", "JOIN", "OR", "LIKE", "EXCEPT",
        "UNION",  "INTERSECT", "HAVING", "DISTINCT", "CASE", "WITH",
    };
    for (auto k : kw)
        if (k == upper) return true;
    return false;
}

inline bool is_word_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

inline std::string to_upper_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace detail

// Splits SQL into keyword / identifier / literal / punctuation tokens.
// String literals ('..', '' escape) and comments (-- and /* */) never yield
// keywords; double-quoted and backtick-quoted segments are identifiers.
// GROUP BY and ORDER BY come out as single compound keyword tokens, tolerant
// of any whitespace or comments between the two words. An unterminated quote
// is a lex error.
inline SqlTokenStream tokenize_sql(std::string_view sql) {
    SqlTokenStream stream;
    int depth = 0;
    size_t i = 0;
    const size_t n = sql.size();

    auto skip_blank = [&](size_t pos) {
        // whitespace and comments
        while (pos < n) {
            char c = sql[pos];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else if (c == '-' && pos + 1 < n && sql[pos + 1] == '-') {
                while (pos < n && sql[pos] != '\n') ++pos;
            } else if (c == '/' && pos + 1 < n && sql[pos + 1] == '*') {
                pos += 2;
                while (pos + 1 < n && !(sql[pos] == '*' && sql[pos + 1] == '/')) ++pos;
                pos = (pos + 1 < n) ? pos + 2 : n;
            } else {
                break;
            }
        }
        return pos;
    };

    while ((i = skip_blank(i)) < n) {
        const char c = sql[i];
        const size_t start = i;

        if (c == '\'') {
            ++i;
            std::string body;
            bool closed = false;
            while (i < n) {
                if (sql[i] == '\'') {
                    if (i + 1 < n && sql[i + 1] == '\'') {  // doubled quote escape
                        body.push_back('\'');
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                body.push_back(sql[i++]);
            }
            if (!closed) raise(Errc::lex, "unterminated string literal at offset " + std::to_string(start));
            stream.tokens.push_back({TokKind::literal, std::move(body), start, i, depth});
            continue;
        }

        if (c == '"' || c == '`') {
            const char quote = c;
            ++i;
            std::string body;
            bool closed = false;
            while (i < n) {
                if (sql[i] == quote) {
                    if (i + 1 < n && sql[i + 1] == quote) {
                        body.push_back(quote);
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                body.push_back(sql[i++]);
            }
            if (!closed) raise(Errc::lex, "unterminated quoted identifier at offset " + std::to_string(start));
            stream.tokens.push_back({TokKind::identifier, std::move(body), start, i, depth});
            continue;
        }

        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            ++i;
            while (i < n && (std::isalnum(static_cast<unsigned char>(sql[i])) || sql[i] == '.' ||
                             ((sql[i] == '+' || sql[i] == '-') && (sql[i - 1] == 'e' || sql[i - 1] == 'E'))))
                ++i;
            stream.tokens.push_back({TokKind::literal, std::string(sql.substr(start, i - start)), start, i, depth});
            continue;
        }

        if (detail::is_word_start(c)) {
            ++i;
            while (i < n && detail::is_word_char(sql[i])) ++i;
            std::string upper = detail::to_upper_ascii(sql.substr(start, i - start));

            if (upper == "GROUP" || upper == "ORDER") {
                const size_t after = skip_blank(i);
                size_t j = after;
                if (j < n && detail::is_word_start(sql[j])) {
                    ++j;
                    while (j < n && detail::is_word_char(sql[j])) ++j;
                    if (detail::to_upper_ascii(sql.substr(after, j - after)) == "BY") {
                        stream.tokens.push_back({TokKind::keyword, upper + " BY", start, j, depth});
                        i = j;
                        continue;
                    }
                }
            }

            if (detail::is_tracked_keyword(upper)) {
                stream.tokens.push_back({TokKind::keyword, std::move(upper), start, i, depth});
            } else {
                stream.tokens.push_back(
                    {TokKind::identifier, std::string(sql.substr(start, i - start)), start, i, depth});
            }
            continue;
        }

        if (c == '(') {
            stream.tokens.push_back({TokKind::punct, "(", start, start + 1, depth});
            ++depth;
            ++i;
            continue;
        }
        if (c == ')') {
            if (depth > 0) --depth;
            stream.tokens.push_back({TokKind::punct, ")", start, start + 1, depth});
            ++i;
            continue;
        }

        stream.tokens.push_back({TokKind::punct, std::string(1, c), start, start + 1, depth});
        ++i;
    }

    return stream;
}

}  // namespace sqleval
