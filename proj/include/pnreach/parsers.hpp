#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pnreach/model.hpp"

namespace pnreach {

struct Equation {
    LinearExpr lhs;
    LinearExpr rhs;
};

/// Linear equations relating the places of an original net to those of a
/// reduced net. A name present in both place sets denotes a surviving place
/// whose original and reduced values are identical.
struct ReductionSystem {
    std::vector<std::string> original_places;
    std::vector<std::string> reduced_places;
    std::vector<Equation> equations;

    bool is_original(const std::string& name) const;
    bool is_reduced(const std::string& name) const;
    /// Original places absent from the reduced net.
    std::vector<std::string> removed_places() const;
};

/// Place/transition core of PNML. Pages are flattened; tool-specific
/// sections are skipped.
PetriNet parse_pnml(std::string_view document);

/// Line-oriented textual nets:
///   pl <name> (<tokens>)
///   tr <name> <in>... -> <out>...     each in/out is `name` or `name*weight`
/// `#` starts a comment. Names containing special characters are written {like this}.
PetriNet parse_net(std::string_view text);
std::string serialize_net(const PetriNet& net);

/// Picks the parser from the file extension (.pnml -> PNML, otherwise textual).
PetriNet load_net(const std::filesystem::path& path);

struct PropertyError {
    std::string id;
    std::string message;
};

struct PropertySet {
    std::vector<Query> queries;
    std::vector<PropertyError> errors;
};

/// Reachability fragment of the MCC property language. A property using an
/// unsupported construct is reported in `errors` without affecting the others.
PropertySet parse_mcc_properties(std::string_view document, const PetriNet& net);

/// Format:
///   # reduced places: a b c
///   c0 + c1*v1 + ... = d0 + d1*w1 + ...
/// Other lines starting with `#` are comments.
ReductionSystem parse_reduction_system(std::string_view text, const std::vector<std::string>& original_places);
std::string serialize_reduction_system(const ReductionSystem& system);

std::string read_file(const std::filesystem::path& path);

}  // namespace pnreach
