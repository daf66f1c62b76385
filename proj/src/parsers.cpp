#include "pnreach/parsers.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "pnreach/error.hpp"
#include "xml.hpp"

namespace pnreach {

namespace {

std::optional<Tokens> to_integer(std::string_view s) {
    Tokens value = 0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return value;
}

// ---------------------------------------------------------------------------
// PNML

struct PnmlArc {
    std::string id;
    std::string source;
    std::string target;
    Tokens weight;
};

struct PnmlCollector {
    PetriNet net;
    std::vector<PnmlArc> arcs;

    void visit(const xml::Element& e) {
        if (e.name == "toolspecific") return;
        if (e.name == "place") {
            const std::string* id = e.attribute("id");
            if (!id) throw ParseError("line " + std::to_string(e.line), "place without id");
            Tokens m0 = 0;
            if (const auto* im = e.child("initialMarking")) {
                std::string text = im->trimmed_text();
                if (!text.empty()) {
                    auto v = to_integer(text);
                    if (!v || *v < 0) throw ParseError(*id, "invalid initial marking '" + text + "'");
                    m0 = *v;
                }
            }
            try {
                net.add_place(*id, m0);
            } catch (const Error& err) {
                throw ParseError(*id, err.what());
            }
            return;
        }
        if (e.name == "transition") {
            const std::string* id = e.attribute("id");
            if (!id) throw ParseError("line " + std::to_string(e.line), "transition without id");
            try {
                net.add_transition(*id);
            } catch (const Error& err) {
                throw ParseError(*id, err.what());
            }
            return;
        }
        if (e.name == "arc") {
            const std::string* id = e.attribute("id");
            std::string where = id ? *id : "line " + std::to_string(e.line);
            const std::string* src = e.attribute("source");
            const std::string* dst = e.attribute("target");
            if (!src || !dst) throw ParseError(where, "arc without source or target");
            Tokens weight = 1;
            if (const auto* ins = e.child("inscription")) {
                std::string text = ins->trimmed_text();
                auto v = to_integer(text);
                if (!v) throw ParseError(where, "invalid inscription '" + text + "'");
                if (*v < 0) throw ParseError(where, "negative arc weight");
                weight = *v;
            }
            arcs.push_back(PnmlArc{where, *src, *dst, weight});
            return;
        }
        for (const auto& c : e.children) visit(*c);
    }

    void resolve_arcs() {
        for (const auto& a : arcs) {
            auto sp = net.find_place(a.source);
            auto st = net.find_transition(a.source);
            auto dp = net.find_place(a.target);
            auto dt = net.find_transition(a.target);
            if (!sp && !st) throw ParseError(a.id, "arc source '" + a.source + "' is not a node of the net");
            if (!dp && !dt) throw ParseError(a.id, "arc target '" + a.target + "' is not a node of the net");
            if (sp && dt)
                net.add_pre(*dt, *sp, a.weight);
            else if (st && dp)
                net.add_post(*st, *dp, a.weight);
            else
                throw ParseError(a.id, "arc must connect a place and a transition");
        }
    }
};

// ---------------------------------------------------------------------------
// Textual nets

struct Token {
    enum Kind { Name, LParen, RParen, Star, Arrow } kind;
    std::string text;
};

bool is_special(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '*' || c == '{' ||
           c == '}' || c == '#';
}

std::vector<Token> lex_line(std::string_view line, std::size_t lineno) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto error = [&](const std::string& msg) { return ParseError("line " + std::to_string(lineno), msg); };
    while (i < line.size()) {
        char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        if (c == '#') break;
        if (c == '(') { out.push_back({Token::LParen, "("}); ++i; continue; }
        if (c == ')') { out.push_back({Token::RParen, ")"}); ++i; continue; }
        if (c == '*') { out.push_back({Token::Star, "*"}); ++i; continue; }
        if (line.substr(i, 2) == "->") { out.push_back({Token::Arrow, "->"}); i += 2; continue; }
        if (c == '}') throw error("unexpected '}'");
        if (c == '{') {
            std::string name;
            ++i;
            bool closed = false;
            while (i < line.size()) {
                if (line[i] == '\\' && i + 1 < line.size()) {
                    name += line[i + 1];
                    i += 2;
                } else if (line[i] == '}') {
                    closed = true;
                    ++i;
                    break;
                } else {
                    name += line[i++];
                }
            }
            if (!closed) throw error("unterminated '{'");
            out.push_back({Token::Name, name});
            continue;
        }
        std::string name;
        while (i < line.size() && !is_special(line[i]) && line.substr(i, 2) != "->") name += line[i++];
        out.push_back({Token::Name, name});
    }
    return out;
}

bool is_bare_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name)
        if (is_special(c) || c == '\\') return false;
    return name.find("->") == std::string::npos;
}

std::string quote_name(const std::string& name) {
    if (is_bare_name(name)) return name;
    std::string out = "{";
    for (char c : name) {
        if (c == '}' || c == '\\') out += '\\';
        out += c;
    }
    return out + "}";
}

std::string quote_variable(const std::string& name) {
    bool bare = !name.empty() && !to_integer(name);
    for (char c : name)
        if (std::isspace(static_cast<unsigned char>(c)) || std::string_view("+-*=,{}#\\").find(c) != std::string_view::npos)
            bare = false;
    if (bare) return name;
    std::string out = "{";
    for (char c : name) {
        if (c == '}' || c == '\\') out += '\\';
        out += c;
    }
    return out + "}";
}

// ---------------------------------------------------------------------------
// MCC properties

class UnsupportedProperty : public Error {
public:
    using Error::Error;
};

class PropertyBuilder {
public:
    explicit PropertyBuilder(const PetriNet& net) : net_(net) {}

    Query build(const std::string& id, const xml::Element& formula) {
        auto kids = formula.elements();
        if (kids.size() != 1) throw UnsupportedProperty("formula must have exactly one child");
        const xml::Element& path = *kids.front();
        auto inner = path.elements();
        if (inner.size() != 1) throw UnsupportedProperty("expected a single temporal operator under '" + path.name + "'");
        const xml::Element& temporal = *inner.front();
        Quantifier q;
        if (path.name == "exists-path" && temporal.name == "finally")
            q = Quantifier::EF;
        else if (path.name == "all-paths" && temporal.name == "globally")
            q = Quantifier::AG;
        else
            throw UnsupportedProperty("unsupported temporal pattern '" + path.name + "/" + temporal.name + "'");
        auto body = temporal.elements();
        if (body.size() != 1) throw UnsupportedProperty("temporal operator must have exactly one operand");
        return Query{id, q, boolean(*body.front())};
    }

private:
    BoolExpr boolean(const xml::Element& e) {
        const std::string& n = e.name;
        auto kids = e.elements();
        if (n == "true") return BoolExpr::constant(true);
        if (n == "false") return BoolExpr::constant(false);
        if (n == "negation") {
            if (kids.size() != 1) throw UnsupportedProperty("negation expects one operand");
            return BoolExpr::negation(boolean(*kids.front()));
        }
        if (n == "conjunction" || n == "disjunction") {
            std::vector<BoolExpr> parts;
            for (const auto* k : kids) parts.push_back(boolean(*k));
            return n == "conjunction" ? BoolExpr::conjunction(std::move(parts))
                                      : BoolExpr::disjunction(std::move(parts));
        }
        if (n == "imply") {
            if (kids.size() != 2) throw UnsupportedProperty("imply expects two operands");
            return BoolExpr::negation(boolean(*kids[0])) || boolean(*kids[1]);
        }
        if (n == "equivalence") {
            if (kids.size() != 2) throw UnsupportedProperty("equivalence expects two operands");
            BoolExpr a = boolean(*kids[0]);
            BoolExpr b = boolean(*kids[1]);
            return (a && b) || (BoolExpr::negation(a) && BoolExpr::negation(b));
        }
        if (n == "is-fireable") {
            std::vector<BoolExpr> parts;
            for (const auto* k : kids) {
                if (k->name != "transition") throw UnsupportedProperty("is-fireable expects transition elements");
                std::string name = xml::trim(k->text);
                auto t = net_.find_transition(name);
                if (!t) throw UnsupportedProperty("unknown transition '" + name + "'");
                parts.push_back(enabled_formula(net_, *t));
            }
            return BoolExpr::disjunction(std::move(parts));
        }
        if (n == "is-deadlock") return deadlock_formula(net_);
        if (n.rfind("integer-", 0) == 0 && kids.size() == 2) {
            LinearExpr a = integer(*kids[0]);
            LinearExpr b = integer(*kids[1]);
            LinearExpr one(1);
            if (n == "integer-le") return BoolExpr::atom(a, Comparison::Le, b);
            if (n == "integer-ge") return BoolExpr::atom(a, Comparison::Ge, b);
            if (n == "integer-eq") return BoolExpr::atom(a, Comparison::Eq, b);
            if (n == "integer-lt") return BoolExpr::atom(a, Comparison::Le, b - one);
            if (n == "integer-gt") return BoolExpr::atom(a, Comparison::Ge, b + one);
            if (n == "integer-ne") return BoolExpr::negation(BoolExpr::atom(a, Comparison::Eq, b));
        }
        throw UnsupportedProperty("unsupported operator '" + n + "'");
    }

    LinearExpr integer(const xml::Element& e) {
        const std::string& n = e.name;
        auto kids = e.elements();
        if (n == "integer-constant") {
            auto v = to_integer(xml::trim(e.text));
            if (!v) throw UnsupportedProperty("invalid integer constant '" + xml::trim(e.text) + "'");
            return LinearExpr(*v);
        }
        if (n == "tokens-count") {
            LinearExpr sum;
            for (const auto* k : kids) {
                if (k->name != "place") throw UnsupportedProperty("tokens-count expects place elements");
                std::string name = xml::trim(k->text);
                if (!net_.find_place(name)) throw UnsupportedProperty("unknown place '" + name + "'");
                sum += LinearExpr::place(name);
            }
            return sum;
        }
        if (n == "integer-sum") {
            LinearExpr sum;
            for (const auto* k : kids) sum += integer(*k);
            return sum;
        }
        if (n == "integer-difference" && !kids.empty()) {
            LinearExpr diff = integer(*kids.front());
            for (std::size_t i = 1; i < kids.size(); ++i) diff -= integer(*kids[i]);
            return diff;
        }
        if (n == "integer-product") {
            LinearExpr product(1);
            for (const auto* k : kids) {
                LinearExpr factor = integer(*k);
                if (factor.is_constant())
                    product *= factor.constant();
                else if (product.is_constant())
                    product = factor * product.constant();
                else
                    throw UnsupportedProperty("non-linear product");
            }
            return product;
        }
        throw UnsupportedProperty("unsupported integer expression '" + n + "'");
    }

    const PetriNet& net_;
};

// ---------------------------------------------------------------------------
// Reduction systems

struct SystemLexer {
    std::string_view line;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= line.size();
    }
    char peek() {
        skip_ws();
        return pos < line.size() ? line[pos] : '\0';
    }
    std::string word() {
        skip_ws();
        std::string out;
        if (pos < line.size() && line[pos] == '{') {
            ++pos;
            while (pos < line.size() && line[pos] != '}') {
                if (line[pos] == '\\' && pos + 1 < line.size()) ++pos;
                out += line[pos++];
            }
            if (pos >= line.size()) throw Error("unterminated '{'");
            ++pos;
            return out;
        }
        while (pos < line.size()) {
            char c = line[pos];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '*' || c == '=' ||
                c == ',')
                break;
            out += c;
            ++pos;
        }
        return out;
    }
};

}  // namespace

// ---------------------------------------------------------------------------

bool ReductionSystem::is_original(const std::string& name) const {
    return std::find(original_places.begin(), original_places.end(), name) != original_places.end();
}

bool ReductionSystem::is_reduced(const std::string& name) const {
    return std::find(reduced_places.begin(), reduced_places.end(), name) != reduced_places.end();
}

std::vector<std::string> ReductionSystem::removed_places() const {
    std::vector<std::string> out;
    for (const auto& p : original_places)
        if (!is_reduced(p)) out.push_back(p);
    return out;
}

PetriNet parse_pnml(std::string_view document) {
    auto root = xml::parse(document);
    const xml::Element* net_element = nullptr;
    if (root->name == "net")
        net_element = root.get();
    else
        net_element = root->child("net");
    if (!net_element) throw ParseError("", "no <net> element");
    if (const std::string* type = net_element->attribute("type");
        type && type->find("symmetricnet") != std::string::npos)
        throw ParseError(net_element->attribute("id") ? *net_element->attribute("id") : "",
                         "colored (symmetric) nets are not supported");
    PnmlCollector collector;
    if (const std::string* id = net_element->attribute("id")) collector.net.set_name(*id);
    for (const auto& c : net_element->children) collector.visit(*c);
    collector.resolve_arcs();
    return std::move(collector.net);
}

PetriNet parse_net(std::string_view text) {
    PetriNet net;
    std::set<std::string> declared_places;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++lineno;
        std::string where = "line " + std::to_string(lineno);
        auto tokens = lex_line(line, lineno);
        if (tokens.empty()) {
            if (end == text.size()) break;
            continue;
        }
        auto expect_name = [&](std::size_t i, const char* what) -> const std::string& {
            if (i >= tokens.size() || tokens[i].kind != Token::Name || tokens[i].text.empty())
                throw ParseError(where, std::string("expected ") + what);
            return tokens[i].text;
        };
        auto place_for = [&](const std::string& name) -> PlaceId {
            if (auto p = net.find_place(name)) return *p;
            try {
                return net.add_place(name, 0);
            } catch (const Error& err) {
                throw ParseError(where, err.what());
            }
        };
        const std::string& keyword = expect_name(0, "a keyword");
        if (keyword == "net") {
            net.set_name(expect_name(1, "a net name"));
            if (tokens.size() != 2) throw ParseError(where, "trailing tokens after net name");
        } else if (keyword == "pl") {
            const std::string& name = expect_name(1, "a place name");
            if (declared_places.count(name)) throw ParseError(where, "duplicate declaration of place '" + name + "'");
            Tokens m0 = 0;
            std::size_t i = 2;
            if (i < tokens.size()) {
                if (tokens[i].kind != Token::LParen || i + 2 >= tokens.size() || tokens[i + 1].kind != Token::Name ||
                    tokens[i + 2].kind != Token::RParen)
                    throw ParseError(where, "expected '(<tokens>)'");
                auto v = to_integer(tokens[i + 1].text);
                if (!v || *v < 0) throw ParseError(where, "invalid token count '" + tokens[i + 1].text + "'");
                m0 = *v;
                i += 3;
            }
            if (i != tokens.size()) throw ParseError(where, "trailing tokens after place declaration");
            PlaceId p = place_for(name);
            net.set_initial(p, m0);
            declared_places.insert(name);
        } else if (keyword == "tr") {
            const std::string& name = expect_name(1, "a transition name");
            TransitionId t;
            try {
                t = net.add_transition(name);
            } catch (const Error& err) {
                throw ParseError(where, err.what());
            }
            bool outputs = false;
            bool arrow_seen = false;
            for (std::size_t i = 2; i < tokens.size(); ++i) {
                if (tokens[i].kind == Token::Arrow) {
                    if (arrow_seen) throw ParseError(where, "duplicate '->'");
                    arrow_seen = outputs = true;
                    continue;
                }
                const std::string& place = expect_name(i, "a place name");
                Tokens weight = 1;
                if (i + 1 < tokens.size() && tokens[i + 1].kind == Token::Star) {
                    if (i + 2 >= tokens.size() || tokens[i + 2].kind != Token::Name)
                        throw ParseError(where, "expected a weight after '*'");
                    auto v = to_integer(tokens[i + 2].text);
                    if (!v) throw ParseError(where, "invalid weight '" + tokens[i + 2].text + "'");
                    if (*v <= 0) throw ParseError(where, "arc weight must be positive");
                    weight = *v;
                    i += 2;
                }
                PlaceId p = place_for(place);
                if (outputs)
                    net.add_post(t, p, weight);
                else
                    net.add_pre(t, p, weight);
            }
            if (!arrow_seen) throw ParseError(where, "expected '->' in transition declaration");
        } else {
            throw ParseError(where, "unknown keyword '" + keyword + "'");
        }
        if (end == text.size()) break;
    }
    return net;
}

std::string serialize_net(const PetriNet& net) {
    std::ostringstream out;
    if (!net.name().empty()) out << "net " << quote_name(net.name()) << "\n";
    for (PlaceId p = 0; p < net.place_count(); ++p)
        out << "pl " << quote_name(net.place_name(p)) << " (" << net.initial_marking()[p] << ")\n";
    auto arcs = [&](std::span<const Arc> list) {
        for (const auto& a : list) {
            out << " " << quote_name(net.place_name(a.place));
            if (a.weight != 1) out << "*" << a.weight;
        }
    };
    for (TransitionId t = 0; t < net.transition_count(); ++t) {
        out << "tr " << quote_name(net.transition_name(t));
        arcs(net.pre(t));
        out << " ->";
        arcs(net.post(t));
        out << "\n";
    }
    return out.str();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

PetriNet load_net(const std::filesystem::path& path) {
    std::string content = read_file(path);
    PetriNet net = path.extension() == ".pnml" ? parse_pnml(content) : parse_net(content);
    if (net.name().empty()) net.set_name(path.stem().string());
    return net;
}

PropertySet parse_mcc_properties(std::string_view document, const PetriNet& net) {
    auto root = xml::parse(document);
    PropertySet result;
    std::vector<const xml::Element*> properties;
    if (root->name == "property")
        properties.push_back(root.get());
    else
        for (const auto* c : root->elements())
            if (c->name == "property") properties.push_back(c);
    PropertyBuilder builder(net);
    std::size_t index = 0;
    for (const auto* prop : properties) {
        ++index;
        std::string id;
        if (const auto* id_element = prop->child("id")) id = xml::trim(id_element->text);
        if (id.empty()) id = "property-" + std::to_string(index);
        const auto* formula = prop->child("formula");
        if (!formula) {
            result.errors.push_back({id, "missing <formula>"});
            continue;
        }
        try {
            result.queries.push_back(builder.build(id, *formula));
        } catch (const Error& err) {
            result.errors.push_back({id, err.what()});
        }
    }
    return result;
}

ReductionSystem parse_reduction_system(std::string_view text, const std::vector<std::string>& original_places) {
    ReductionSystem system;
    system.original_places = original_places;
    std::set<std::string> known(original_places.begin(), original_places.end());
    std::size_t lineno = 0;
    std::size_t start = 0;
    const std::string header = "reduced places:";
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string line = xml::trim(text.substr(start, end - start));
        start = end + 1;
        ++lineno;
        std::string where = "line " + std::to_string(lineno);
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::string body = xml::trim(std::string_view(line).substr(1));
            if (body.rfind(header, 0) == 0) {
                SystemLexer lex{std::string_view(body).substr(header.size())};
                while (!lex.done()) {
                    if (lex.peek() == ',') {
                        ++lex.pos;
                        continue;
                    }
                    std::string name = lex.word();
                    if (name.empty()) throw ParseError(where, "invalid place name in header");
                    system.reduced_places.push_back(name);
                    known.insert(name);
                }
            }
            continue;
        }
        SystemLexer lex{line};
        auto side = [&]() {
            LinearExpr sum;
            bool first = true;
            while (!lex.done() && lex.peek() != '=') {
                Tokens sign = 1;
                char c = lex.peek();
                if (c == '+' || c == '-') {
                    sign = c == '-' ? -1 : 1;
                    ++lex.pos;
                } else if (!first) {
                    throw ParseError(where, "expected '+' or '-'");
                }
                first = false;
                std::string a = lex.word();
                if (a.empty()) throw ParseError(where, "expected a term");
                std::string b;
                if (lex.peek() == '*') {
                    ++lex.pos;
                    b = lex.word();
                    if (b.empty()) throw ParseError(where, "expected a factor after '*'");
                }
                auto va = to_integer(a);
                auto vb = b.empty() ? std::optional<Tokens>(1) : to_integer(b);
                auto variable = [&](const std::string& v) {
                    if (!known.count(v)) throw ParseError(where, "undeclared variable '" + v + "'");
                    return v;
                };
                if (b.empty()) {
                    sum += va ? LinearExpr(sign * *va) : LinearExpr::place(variable(a), sign);
                } else if (va && vb) {
                    sum += LinearExpr(sign * *va * *vb);
                } else if (va) {
                    sum += LinearExpr::place(variable(b), sign * *va);
                } else if (vb) {
                    sum += LinearExpr::place(variable(a), sign * *vb);
                } else {
                    throw ParseError(where, "non-linear term");
                }
            }
            if (first) throw ParseError(where, "empty side of equation");
            return sum;
        };
        try {
            LinearExpr lhs = side();
            if (lex.peek() != '=') throw ParseError(where, "expected '='");
            ++lex.pos;
            LinearExpr rhs = side();
            if (!lex.done()) throw ParseError(where, "trailing characters");
            system.equations.push_back(Equation{std::move(lhs), std::move(rhs)});
        } catch (const ParseError&) {
            throw;
        } catch (const Error& err) {
            throw ParseError(where, err.what());
        }
    }
    return system;
}

std::string serialize_reduction_system(const ReductionSystem& system) {
    std::ostringstream out;
    out << "# reduced places:";
    for (const auto& p : system.reduced_places) out << " " << quote_variable(p);
    out << "\n";
    auto side = [&](const LinearExpr& e) {
        bool first = true;
        for (const auto& t : e.terms()) {
            Tokens c = t.coefficient;
            if (!first) out << (c < 0 ? " - " : " + ");
            else if (c < 0) out << "-";
            Tokens mag = c < 0 ? -c : c;
            if (mag != 1) out << mag << "*";
            out << quote_variable(t.place);
            first = false;
        }
        if (first)
            out << e.constant();
        else if (e.constant() != 0)
            out << (e.constant() < 0 ? " - " : " + ") << (e.constant() < 0 ? -e.constant() : e.constant());
    };
    for (const auto& eq : system.equations) {
        side(eq.lhs);
        out << " = ";
        side(eq.rhs);
        out << "\n";
    }
    return out.str();
}

}  // namespace pnreach
