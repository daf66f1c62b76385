#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pnreach::xml {

/// Minimal DOM: element name (namespace prefix stripped), attributes,
/// child elements and concatenated character data.
struct Element {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<std::unique_ptr<Element>> children;
    std::string text;
    long line = 0;

    const std::string* attribute(std::string_view key) const;
    const Element* child(std::string_view child_name) const;
    std::vector<const Element*> elements() const;
    /// Trimmed text of the <text> child when present, otherwise of the element itself.
    std::string trimmed_text() const;
};

/// Throws ParseError with the line number on malformed XML.
std::unique_ptr<Element> parse(std::string_view document);

std::string trim(std::string_view s);

}  // namespace pnreach::xml
