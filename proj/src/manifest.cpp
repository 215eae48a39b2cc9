#include "finsent/manifest.hpp"

#include <fstream>

#include <openssl/evp.h>

#include "finsent/errors.hpp"
#include "finsent/jsonl.hpp"

namespace finsent {

using nlohmann::json;

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path.string() + " for digest");
  }
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw DataError("sha256 init failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)), started_(std::chrono::steady_clock::now()) {}

void RunManifest::set_config(json snapshot) { config_ = std::move(snapshot); }

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs_[path.string()] = {sha256_file(path),
                            std::filesystem::file_size(path)};
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs_[path.string()] = {sha256_file(path),
                             std::filesystem::file_size(path)};
}

void RunManifest::set_count(const std::string& name, std::int64_t value) {
  counts_[name] = value;
}

void RunManifest::set_status_ok() { status_ = "ok"; }

void RunManifest::set_status_error(const std::string& message) {
  status_ = "error";
  error_ = message;
}

json RunManifest::to_json() const {
  auto files_json = [](const std::map<std::string, FileEntry>& files) {
    json obj = json::object();
    for (const auto& [path, entry] : files) {
      obj[path] = json{{"sha256", entry.sha256}, {"bytes", entry.bytes}};
    }
    return obj;
  };
  json counts = json::object();
  for (const auto& [name, value] : counts_) counts[name] = value;
  auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - started_)
                  .count();
  json out{{"command", command_},  {"config", config_},
           {"inputs", files_json(inputs_)}, {"outputs", files_json(outputs_)},
           {"counts", std::move(counts)},  {"status", status_},
           {"wall_time_ms", wall}};
  if (!error_.empty()) out["error"] = error_;
  return out;
}

void RunManifest::write(const std::filesystem::path& path) const {
  jsonl::atomic_write(path, to_json().dump(2) + "\n");
}

std::filesystem::path RunManifest::path_for(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p += ".manifest.json";
  return p;
}

}  // namespace finsent
