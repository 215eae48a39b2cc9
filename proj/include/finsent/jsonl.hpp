#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <json.hpp>

namespace finsent::jsonl {

using json = nlohmann::json;

// Calls fn(line_number, object) for every non-empty line of a JSONL file.
// Line numbers are 1-based. Throws DataError naming file and line on a
// missing file, a line that fails to parse, or a line that is not an object.
void for_each_object(const std::filesystem::path& path,
                     const std::function<void(std::size_t, const json&)>& fn);

// Pulls a field of the given type, throwing DataError with file:line and
// field name when absent or mistyped.
std::string get_string(const json& obj, const char* field,
                       const std::string& where);
double get_number(const json& obj, const char* field, const std::string& where);

// Writes content to path atomically: write to a sibling temp file, then
// rename over the target.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace finsent::jsonl
