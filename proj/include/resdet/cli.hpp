#pragma once

#include <ostream>

namespace resdet {

/// Entry point of the `resdet` tool. Exit codes: 0 success, 2 bad flags,
/// domain or scenario errors, 3 model instability, 1 anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace resdet
