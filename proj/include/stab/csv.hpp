#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace stab {

// Fixed output formatting: 9 significant digits, '.' decimal separator,
// so repeated runs are byte-identical.
std::string format_g9(double v);

// Writes via a temp file in the same directory followed by a rename.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace stab
