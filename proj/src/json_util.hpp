#pragma once

#include "toothsim/geometry.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace toothsim::detail {

std::string readFile(const std::filesystem::path& path);
void writeFile(const std::filesystem::path& path, std::string_view contents);

/// Parses JSON, rethrowing syntax errors as Error with a 1-based line number.
nlohmann::json parseJson(std::string_view text, std::string_view what);

} // namespace toothsim::detail
