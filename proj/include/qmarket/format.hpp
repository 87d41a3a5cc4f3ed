#pragma once

#include <string>

namespace qmarket {

/// Shortest round-trip decimal form of a double. Used for every number
/// written to CSV or JSON so reruns produce byte-identical files.
std::string format_double(double v);

} // namespace qmarket
