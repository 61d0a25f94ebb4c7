#pragma once

namespace imputelab {

/// Parses arguments, runs the selected task, writes reports. Returns the
/// process exit code: 0 success, 2 config/validation error, 3 data error.
int run_cli(int argc, const char* const* argv);

}  // namespace imputelab
