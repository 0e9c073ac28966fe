#ifndef OAAUDIT_XML_HPP
#define OAAUDIT_XML_HPP

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oa::xml {

/// Minimal DOM for the harvest payloads: elements, attributes, character
/// data. Handles declarations, comments, CDATA and the five predefined
/// entities plus numeric references. No namespace resolution; qualified names
/// like "dc:title" are kept verbatim.
struct Element {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<Element> children;
    std::string text; // concatenated character data of this element only

    const std::string* attr(std::string_view key) const;
    const Element* first(std::string_view child_name) const;
    std::vector<const Element*> all(std::string_view child_name) const;
};

/// Throws std::runtime_error with the open-element path on malformed input.
Element parse(std::string_view doc);

std::string escape(std::string_view raw);

} // namespace oa::xml

#endif
