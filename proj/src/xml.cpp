#include "oaaudit/xml.hpp"

#include <cctype>
#include <stdexcept>

namespace oa::xml {

namespace {

constexpr int kMaxDepth = 64;

struct Cursor {
    std::string_view doc;
    std::size_t pos = 0;
    std::vector<std::string> path;

    [[noreturn]] void fail(const std::string& what) const {
        std::string where;
        for (const auto& p : path) where += "/" + p;
        if (where.empty()) where = "/";
        throw std::runtime_error("xml: " + what + " at byte " + std::to_string(pos) +
                                 ", element " + where);
    }

    bool eof() const { return pos >= doc.size(); }
    char peek() const { return doc[pos]; }
    bool starts_with(std::string_view s) const { return doc.substr(pos, s.size()) == s; }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(doc[pos]))) ++pos;
    }
};

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == ':' || c == '_' ||
           c == '-' || c == '.';
}

void decode_entity(Cursor& c, std::string& out) {
    std::size_t end = c.doc.find(';', c.pos);
    if (end == std::string_view::npos || end - c.pos > 10) c.fail("unterminated entity");
    std::string_view name = c.doc.substr(c.pos + 1, end - c.pos - 1);
    if (name == "amp") out += '&';
    else if (name == "lt") out += '<';
    else if (name == "gt") out += '>';
    else if (name == "quot") out += '"';
    else if (name == "apos") out += '\'';
    else if (!name.empty() && name[0] == '#') {
        int base = 10;
        std::string_view digits = name.substr(1);
        if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
            base = 16;
            digits = digits.substr(1);
        }
        unsigned long cp = 0;
        try {
            cp = std::stoul(std::string(digits), nullptr, base);
        } catch (...) {
            c.fail("bad character reference");
        }
        // Encode as UTF-8.
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x110000) {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            c.fail("character reference out of range");
        }
    } else {
        c.fail("unknown entity '" + std::string(name) + "'");
    }
    c.pos = end + 1;
}

// Skips <?...?>, <!--...-->, <!DOCTYPE...>; returns false when cursor sits on
// something else.
bool skip_misc(Cursor& c) {
    if (c.starts_with("<?")) {
        std::size_t end = c.doc.find("?>", c.pos);
        if (end == std::string_view::npos) c.fail("unterminated processing instruction");
        c.pos = end + 2;
        return true;
    }
    if (c.starts_with("<!--")) {
        std::size_t end = c.doc.find("-->", c.pos);
        if (end == std::string_view::npos) c.fail("unterminated comment");
        c.pos = end + 3;
        return true;
    }
    if (c.starts_with("<!") && !c.starts_with("<![CDATA[")) {
        std::size_t end = c.doc.find('>', c.pos);
        if (end == std::string_view::npos) c.fail("unterminated declaration");
        c.pos = end + 1;
        return true;
    }
    return false;
}

std::string read_name(Cursor& c) {
    std::size_t start = c.pos;
    while (!c.eof() && is_name_char(c.peek())) ++c.pos;
    if (c.pos == start) c.fail("expected name");
    return std::string(c.doc.substr(start, c.pos - start));
}

Element parse_element(Cursor& c, int depth) {
    if (depth > kMaxDepth) c.fail("nesting too deep");
    if (c.eof() || c.peek() != '<') c.fail("expected element");
    ++c.pos;
    Element el;
    el.name = read_name(c);
    c.path.push_back(el.name);

    // Attributes.
    for (;;) {
        c.skip_ws();
        if (c.eof()) c.fail("unterminated start tag");
        if (c.peek() == '>' || c.starts_with("/>")) break;
        std::string key = read_name(c);
        c.skip_ws();
        if (c.eof() || c.peek() != '=') c.fail("expected '=' after attribute name");
        ++c.pos;
        c.skip_ws();
        if (c.eof() || (c.peek() != '"' && c.peek() != '\'')) c.fail("expected quoted value");
        char quote = c.peek();
        ++c.pos;
        std::string value;
        while (!c.eof() && c.peek() != quote) {
            if (c.peek() == '&') decode_entity(c, value);
            else value += c.doc[c.pos++];
        }
        if (c.eof()) c.fail("unterminated attribute value");
        ++c.pos;
        el.attrs.emplace_back(std::move(key), std::move(value));
    }
    if (c.starts_with("/>")) {
        c.pos += 2;
        c.path.pop_back();
        return el;
    }
    ++c.pos; // '>'

    // Content.
    for (;;) {
        if (c.eof()) c.fail("missing closing tag");
        if (c.starts_with("<![CDATA[")) {
            std::size_t end = c.doc.find("]]>", c.pos);
            if (end == std::string_view::npos) c.fail("unterminated CDATA");
            el.text.append(c.doc.substr(c.pos + 9, end - c.pos - 9));
            c.pos = end + 3;
            continue;
        }
        if (c.starts_with("</")) {
            c.pos += 2;
            std::string name = read_name(c);
            if (name != el.name) c.fail("mismatched closing tag '" + name + "'");
            c.skip_ws();
            if (c.eof() || c.peek() != '>') c.fail("malformed closing tag");
            ++c.pos;
            c.path.pop_back();
            return el;
        }
        if (skip_misc(c)) continue;
        if (c.peek() == '<') {
            el.children.push_back(parse_element(c, depth + 1));
            continue;
        }
        if (c.peek() == '&') {
            decode_entity(c, el.text);
            continue;
        }
        el.text += c.doc[c.pos++];
    }
}

} // namespace

const std::string* Element::attr(std::string_view key) const {
    for (const auto& [k, v] : attrs)
        if (k == key) return &v;
    return nullptr;
}

const Element* Element::first(std::string_view child_name) const {
    for (const Element& ch : children)
        if (ch.name == child_name) return &ch;
    return nullptr;
}

std::vector<const Element*> Element::all(std::string_view child_name) const {
    std::vector<const Element*> out;
    for (const Element& ch : children)
        if (ch.name == child_name) out.push_back(&ch);
    return out;
}

Element parse(std::string_view doc) {
    Cursor c{doc, {}};
    c.skip_ws();
    while (!c.eof() && skip_misc(c)) c.skip_ws();
    Element root = parse_element(c, 0);
    c.skip_ws();
    while (!c.eof() && skip_misc(c)) c.skip_ws();
    if (!c.eof()) c.fail("trailing content after document element");
    return root;
}

std::string escape(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char ch : raw) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += ch;
        }
    }
    return out;
}

} // namespace oa::xml
