// Command-line front end: deterministic, config-driven runs of the
// simulation and analysis pipelines. Exit codes: 0 success, 2 configuration
// error, 3 runtime failure.
#pragma once

namespace hyqsim::cli {

inline constexpr const char* kVersion = "0.1.0";

int main(int argc, const char* const* argv);

}  // namespace hyqsim::cli
