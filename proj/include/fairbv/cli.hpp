#pragma once

#include <iosfwd>

namespace fairbv {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitUsage = 2, kExitPropertyFailure = 3 };

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace fairbv
