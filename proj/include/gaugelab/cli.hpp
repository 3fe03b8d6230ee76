#pragma once

#include <iosfwd>

namespace gaugelab {

/// Entry point of the gauge_lab tool. Exit codes: 0 all checks passed,
/// 1 a check failed (the report is still written), 2 usage or config error.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace gaugelab
