#pragma once

#include <string>

namespace stockcast {

// "%.17g": every double survives a text round trip.
std::string format_g17(double value);

// Shortest text that parses back to the same double.
std::string format_shortest(double value);

}  // namespace stockcast
