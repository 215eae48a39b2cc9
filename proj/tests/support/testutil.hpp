#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

namespace finsent::testsupport {

// Unique scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("finsent-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// Runs fn, requires it to throw E, and checks the message mentions needle.
template <typename E, typename Fn>
std::string expect_error(Fn&& fn, const std::string& needle = "") {
  try {
    fn();
  } catch (const E& e) {
    std::string message = e.what();
    if (!needle.empty()) {
      CHECK_MESSAGE(message.find(needle) != std::string::npos,
                    "unexpected message: ", message);
    }
    return message;
  } catch (const std::exception& e) {
    FAIL("wrong exception type: ", e.what());
    return "";
  }
  FAIL("no exception thrown");
  return "";
}

}  // namespace finsent::testsupport
