#pragma once

#include <ostream>

namespace wigner::cli {

/// Runs one `wigner-lab` invocation. Returns 0 when every gating check passes,
/// 1 on a statistical failure and 2 on a usage, configuration or I/O error.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wigner::cli
