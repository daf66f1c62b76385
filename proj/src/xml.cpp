#include "xml.hpp"

#include <expat.h>

#include "pnreach/error.hpp"

namespace pnreach::xml {

namespace {

std::string local_name(const char* name) {
    std::string_view n(name);
    // expat is created with a namespace separator of ' '
    auto pos = n.rfind(' ');
    if (pos != std::string_view::npos) n.remove_prefix(pos + 1);
    return std::string(n);
}

struct Builder {
    XML_Parser parser = nullptr;
    std::unique_ptr<Element> root;
    std::vector<Element*> stack;
};

void on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
    auto* b = static_cast<Builder*>(data);
    auto element = std::make_unique<Element>();
    element->name = local_name(name);
    element->line = static_cast<long>(XML_GetCurrentLineNumber(b->parser));
    for (int i = 0; attrs[i]; i += 2) element->attributes.emplace_back(local_name(attrs[i]), attrs[i + 1]);
    Element* raw = element.get();
    if (b->stack.empty())
        b->root = std::move(element);
    else
        b->stack.back()->children.push_back(std::move(element));
    b->stack.push_back(raw);
}

void on_end(void* data, const XML_Char*) { static_cast<Builder*>(data)->stack.pop_back(); }

void on_text(void* data, const XML_Char* s, int len) {
    auto* b = static_cast<Builder*>(data);
    if (!b->stack.empty()) b->stack.back()->text.append(s, static_cast<std::size_t>(len));
}

}  // namespace

std::string trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto begin = s.find_first_not_of(ws);
    if (begin == std::string_view::npos) return {};
    auto end = s.find_last_not_of(ws);
    return std::string(s.substr(begin, end - begin + 1));
}

const std::string* Element::attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return &v;
    return nullptr;
}

const Element* Element::child(std::string_view child_name) const {
    for (const auto& c : children)
        if (c->name == child_name) return c.get();
    return nullptr;
}

std::vector<const Element*> Element::elements() const {
    std::vector<const Element*> out;
    out.reserve(children.size());
    for (const auto& c : children) out.push_back(c.get());
    return out;
}

std::string Element::trimmed_text() const {
    if (const Element* t = child("text")) return trim(t->text);
    return trim(text);
}

std::unique_ptr<Element> parse(std::string_view document) {
    Builder builder;
    XML_Parser parser = XML_ParserCreateNS(nullptr, ' ');
    if (!parser) throw Error("cannot allocate XML parser");
    builder.parser = parser;
    XML_SetUserData(parser, &builder);
    XML_SetElementHandler(parser, on_start, on_end);
    XML_SetCharacterDataHandler(parser, on_text);
    if (XML_Parse(parser, document.data(), static_cast<int>(document.size()), 1) == XML_STATUS_ERROR) {
        std::string message = XML_ErrorString(XML_GetErrorCode(parser));
        long line = static_cast<long>(XML_GetCurrentLineNumber(parser));
        XML_ParserFree(parser);
        throw ParseError("line " + std::to_string(line), "malformed XML: " + message);
    }
    XML_ParserFree(parser);
    if (!builder.root) throw ParseError("", "empty XML document");
    return std::move(builder.root);
}

}  // namespace pnreach::xml
