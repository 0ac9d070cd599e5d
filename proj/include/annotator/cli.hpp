#pragma once

namespace annotator {

// Exit codes: 0 success, 1 validation/config error, 2 provider failure,
// 64 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace annotator
