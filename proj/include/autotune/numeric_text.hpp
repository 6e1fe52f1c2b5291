#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace autotune {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_number(double value);

/// Parses the whole of `text` as a finite-or-not double; nullopt on garbage.
std::optional<double> parse_number(std::string_view text);

std::uint64_t fnv1a64(std::string_view text);

}  // namespace autotune
