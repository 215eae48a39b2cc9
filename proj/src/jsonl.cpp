#include "finsent/jsonl.hpp"

#include <fstream>
#include <system_error>

#include "finsent/errors.hpp"

namespace finsent::jsonl {

void for_each_object(const std::filesystem::path& path,
                     const std::function<void(std::size_t, const json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed JSON line");
    }
    if (!obj.is_object()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected a JSON object");
    }
    fn(line_no, obj);
  }
}

std::string get_string(const json& obj, const char* field,
                       const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    throw DataError(where + ": missing or non-string field \"" +
                    std::string(field) + "\"");
  }
  return it->get<std::string>();
}

double get_number(const json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_number()) {
    throw DataError(where + ": missing or non-numeric field \"" +
                    std::string(field) + "\"");
  }
  return it->get<double>();
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DataError("cannot write " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw DataError("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw DataError("cannot rename " + tmp.string() + " to " + path.string() +
                    ": " + ec.message());
  }
}

}  // namespace finsent::jsonl
