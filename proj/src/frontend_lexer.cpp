#include <cctype>

#include "fspvm/frontend.hpp"

namespace fspvm::frontend {

std::string FrontendError::text() const {
    const char* what = "error";
    switch (kind) {
        case Kind::Lex: what = "lexical error"; break;
        case Kind::Parse: what = "parse error"; break;
        case Kind::Unsupported: what = "unsupported construct"; break;
        case Kind::Translate: what = "translation error"; break;
        case Kind::Read: what = "read error"; break;
    }
    return "line " + std::to_string(line) + ": " + what + ": " + message;
}

namespace {

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool ident_char(char c) {
    return ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

// Multi-character operators, longest first within each leading character.
const char* const kDigraphs[] = {
    "||", "&&", "==", "!=", "<=", ">=", "++", "--",
    "+=", "-=", "*=", "/=", "%=", "=>",
};

}  // namespace

LexResult lex(const std::string& src) {
    LexResult out;
    int line = 1;
    size_t i = 0;
    const size_t n = src.size();

    auto push = [&](TokenKind k, std::string text) {
        out.tokens.push_back(Token{k, std::move(text), line});
    };

    while (i < n) {
        char c = src[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            i += 2;
            while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
                if (src[i] == '\n') ++line;
                ++i;
            }
            if (i + 1 >= n) {
                out.error = FrontendError{FrontendError::Kind::Lex, line,
                                          "unterminated comment"};
                return out;
            }
            i += 2;
            continue;
        }
        if (ident_start(c)) {
            size_t j = i;
            while (j < n && ident_char(src[j])) ++j;
            push(TokenKind::Identifier, src.substr(i, j - i));
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            if (c == '0' && i + 1 < n && (src[i + 1] == 'x' || src[i + 1] == 'X')) {
                j = i + 2;
                while (j < n && std::isxdigit(static_cast<unsigned char>(src[j]))) ++j;
            } else {
                while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            push(TokenKind::Number, src.substr(i, j - i));
            i = j;
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            std::string text;
            size_t j = i + 1;
            while (j < n && src[j] != quote) {
                char d = src[j];
                if (d == '\\' && j + 1 < n) {
                    ++j;
                    switch (src[j]) {
                        case 'n': d = '\n'; break;
                        case 't': d = '\t'; break;
                        default: d = src[j];
                    }
                }
                if (d == '\n') ++line;
                text.push_back(d);
                ++j;
            }
            if (j >= n) {
                out.error = FrontendError{FrontendError::Kind::Lex, line,
                                          "unterminated string"};
                return out;
            }
            push(TokenKind::StringLit, std::move(text));
            i = j + 1;
            continue;
        }
        bool matched = false;
        for (const char* d : kDigraphs) {
            if (c == d[0] && i + 1 < n && src[i + 1] == d[1]) {
                push(TokenKind::Punct, d);
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string("+-*/%<>=!(){}[];,.&|^~?:").find(c) != std::string::npos) {
            push(TokenKind::Punct, std::string(1, c));
            ++i;
            continue;
        }
        out.error = FrontendError{FrontendError::Kind::Lex, line,
                                  std::string("stray character '") + c + "'"};
        return out;
    }
    push(TokenKind::End, "");
    return out;
}

}  // namespace fspvm::frontend
