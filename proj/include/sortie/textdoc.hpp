#pragma once

// Line-oriented structured-text format shared by scenario files, model
// snapshots and campaign logs.
//
//   # comment
//   name [id] {
//     key value...
//     nested [id] {
//       ...
//     }
//   }
//
// Block headers end with '{'; a closing '}' stands alone on its line.
// Entries are single-line key/value-list pairs. '#' starts a comment.

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sortie {

struct TextParseError : std::runtime_error {
    int line = 0;
    int col = 0;
    TextParseError(int line_, int col_, const std::string& msg)
        : std::runtime_error(std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
          line(line_), col(col_) {}
};

struct TextEntry {
    std::string key;
    std::vector<std::string> values;
    int line = 0;
};

struct TextNode {
    std::string name;
    std::string id; // optional second header token
    std::vector<TextEntry> entries;
    std::vector<TextNode> children;
    int line = 0;

    const TextEntry* find_entry(std::string_view key) const {
        for (const auto& e : entries)
            if (e.key == key) return &e;
        return nullptr;
    }
    const TextNode* find_child(std::string_view name_) const {
        for (const auto& c : children)
            if (c.name == name_) return &c;
        return nullptr;
    }
};

namespace detail {

struct Token {
    std::string text;
    int line;
    int col;
};

inline std::vector<std::vector<Token>> tokenize_lines(std::string_view text) {
    std::vector<std::vector<Token>> lines;
    std::vector<Token> current;
    int line = 1, col = 1;
    std::string word;
    int word_col = 0;

    auto flush_word = [&]() {
        if (!word.empty()) {
            current.push_back(Token{word, line, word_col});
            word.clear();
        }
    };
    auto flush_line = [&]() {
        flush_word();
        if (!current.empty()) {
            lines.push_back(current);
            current.clear();
        }
    };

    bool in_comment = false;
    for (char ch : text) {
        if (ch == '\n') {
            flush_line();
            in_comment = false;
            ++line;
            col = 1;
            continue;
        }
        if (!in_comment) {
            if (ch == '#') {
                flush_word();
                in_comment = true;
            } else if (ch == ' ' || ch == '\t' || ch == '\r') {
                flush_word();
            } else if (ch == '{' || ch == '}') {
                flush_word();
                current.push_back(Token{std::string(1, ch), line, col});
            } else {
                if (word.empty()) word_col = col;
                word.push_back(ch);
            }
        }
        ++col;
    }
    flush_line();
    return lines;
}

} // namespace detail

// Parses a whole document into a list of top-level nodes.
inline std::vector<TextNode> parse_textdoc(std::string_view text) {
    auto lines = detail::tokenize_lines(text);

    std::vector<TextNode> roots;
    std::vector<TextNode*> stack;

    for (const auto& toks : lines) {
        const auto& first = toks.front();
        if (first.text == "}") {
            if (toks.size() != 1)
                throw TextParseError(first.line, first.col, "'}' must stand alone on its line");
            if (stack.empty())
                throw TextParseError(first.line, first.col, "unmatched '}'");
            stack.pop_back();
            continue;
        }
        if (first.text == "{")
            throw TextParseError(first.line, first.col, "block header must start with a name");

        if (toks.back().text == "{") {
            if (toks.size() > 3)
                throw TextParseError(first.line, first.col,
                                     "block header takes at most a name and an id");
            TextNode node;
            node.name = toks[0].text;
            if (toks.size() == 3) node.id = toks[1].text;
            node.line = first.line;
            TextNode* placed = nullptr;
            if (stack.empty()) {
                roots.push_back(std::move(node));
                placed = &roots.back();
            } else {
                stack.back()->children.push_back(std::move(node));
                placed = &stack.back()->children.back();
            }
            stack.push_back(placed);
            continue;
        }

        for (const auto& t : toks)
            if (t.text == "{" || t.text == "}")
                throw TextParseError(t.line, t.col, "braces may not appear inside an entry");
        if (stack.empty())
            throw TextParseError(first.line, first.col,
                                 "entry '" + first.text + "' outside of any block");
        TextEntry entry;
        entry.key = first.text;
        entry.line = first.line;
        for (std::size_t i = 1; i < toks.size(); ++i) entry.values.push_back(toks[i].text);
        stack.back()->entries.push_back(std::move(entry));
    }

    if (!stack.empty())
        throw TextParseError(stack.back()->line, 1,
                             "unterminated block '" + stack.back()->name + "'");
    return roots;
}

// ---- typed accessors -------------------------------------------------------

inline long long textdoc_int(const TextEntry& e, std::size_t idx) {
    if (idx >= e.values.size())
        throw TextParseError(e.line, 1, "entry '" + e.key + "' is missing a value");
    const std::string& s = e.values[idx];
    long long out = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || p != s.data() + s.size())
        throw TextParseError(e.line, 1, "entry '" + e.key + "': '" + s + "' is not an integer");
    return out;
}

inline double textdoc_real(const TextEntry& e, std::size_t idx) {
    if (idx >= e.values.size())
        throw TextParseError(e.line, 1, "entry '" + e.key + "' is missing a value");
    const std::string& s = e.values[idx];
    try {
        std::size_t pos = 0;
        double out = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return out;
    } catch (const std::exception&) {
        throw TextParseError(e.line, 1, "entry '" + e.key + "': '" + s + "' is not a number");
    }
}

inline bool textdoc_bool(const TextEntry& e, std::size_t idx) {
    if (idx >= e.values.size())
        throw TextParseError(e.line, 1, "entry '" + e.key + "' is missing a value");
    const std::string& s = e.values[idx];
    if (s == "true") return true;
    if (s == "false") return false;
    throw TextParseError(e.line, 1, "entry '" + e.key + "': '" + s + "' is not a boolean");
}

// Stable float rendering: shortest form that never varies across runs.
inline std::string textdoc_format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// ---- writer ----------------------------------------------------------------

namespace detail {

inline void write_node(std::string& out, const TextNode& node, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    out += pad;
    out += node.name;
    if (!node.id.empty()) {
        out += ' ';
        out += node.id;
    }
    out += " {\n";
    const std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
    for (const auto& e : node.entries) {
        out += inner;
        out += e.key;
        for (const auto& v : e.values) {
            out += ' ';
            out += v;
        }
        out += '\n';
    }
    for (const auto& c : node.children) write_node(out, c, depth + 1);
    out += pad;
    out += "}\n";
}

} // namespace detail

inline std::string write_textdoc(const std::vector<TextNode>& nodes) {
    std::string out;
    for (const auto& n : nodes) detail::write_node(out, n, 0);
    return out;
}

} // namespace sortie
