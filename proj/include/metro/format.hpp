#pragma once

#include <string>

namespace metro {

// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

}  // namespace metro
