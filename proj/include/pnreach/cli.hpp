#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pnreach/scheduler.hpp"

namespace pnreach::cli {

struct OutputOptions {
    bool show_techniques = false;
    bool show_time = false;
    bool show_model = false;
};

/// Result lines for one query:
///   FORMULA <id> TRUE|FALSE|CANNOT_COMPUTE [TECHNIQUES <label>]
///   TIME <seconds, 3 decimals>          with show_time
///   MODEL <place:tokens ...>            with show_model, when a witness exists
///   TRACE <transition ...>              with show_model, when a trace exists
/// `trace_net` names the transitions of reduced-net traces.
std::vector<std::string> format_result(const PortfolioResult& result, const OutputOptions& options,
                                       const PetriNet& net, const PetriNet* trace_net = nullptr);

/// "REDUCTION RATIO 75.00%".
std::string format_reduction_ratio(double ratio);

/// Whole command line. Exit codes: 0 done, 1 usage or input error, 2 internal error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pnreach::cli
