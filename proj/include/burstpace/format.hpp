#ifndef BURSTPACE_FORMAT_HPP
#define BURSTPACE_FORMAT_HPP

#include <optional>
#include <string>
#include <vector>

namespace burstpace {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

/// Fixed-point text with `decimals` digits, trailing zeros trimmed; falls
/// back to format_number() when `decimals` is empty.
std::string format_number(double v, std::optional<int> decimals);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

/// Splits on `sep`, keeping empty fields.
std::vector<std::string> split(const std::string& text, char sep);

} // namespace burstpace

#endif // BURSTPACE_FORMAT_HPP
