#pragma once

#include <stdexcept>
#include <string>

namespace finsent {

// Malformed records, schema mismatches, bad file contents. Exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Transport failures, non-success statuses, exhausted retries. Exit code 3.
class BackendError : public std::runtime_error {
 public:
  explicit BackendError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace finsent
