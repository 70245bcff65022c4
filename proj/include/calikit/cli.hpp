#pragma once

#include <string>
#include <vector>

namespace calikit {

// Runs one CLI invocation. Exit codes: 0 success, 1 usage error, 2 data
// error, 3 numerical failure under --strict.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace calikit
