#pragma once

#include <iosfwd>

namespace eos {

/// Built-in invariant suite; prints one PASS/FAIL line per check and returns
/// the number of failures.
int run_self_check(std::ostream& out);

}  // namespace eos
