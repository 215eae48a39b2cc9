#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

namespace finsent {

// Reproducibility record written next to every command's output, success or
// failure. Digests cover every input and output file. Reruns with the same
// config and seeds differ only in wall_time_ms.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_config(nlohmann::json snapshot);
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void set_count(const std::string& name, std::int64_t value);
  void set_status_ok();
  void set_status_error(const std::string& message);

  nlohmann::json to_json() const;  // includes wall time up to now

  // Atomic write to <output>.manifest.json (or an explicit path).
  void write(const std::filesystem::path& path) const;
  static std::filesystem::path path_for(const std::filesystem::path& output);

 private:
  struct FileEntry {
    std::string sha256;
    std::uint64_t bytes = 0;
  };

  std::string command_;
  nlohmann::json config_ = nlohmann::json::object();
  std::map<std::string, FileEntry> inputs_;
  std::map<std::string, FileEntry> outputs_;
  std::map<std::string, std::int64_t> counts_;
  std::string status_ = "running";
  std::string error_;
  std::chrono::steady_clock::time_point started_;
};

// SHA-256 of a file's bytes, lowercase hex. Throws DataError when the file
// cannot be read.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace finsent
