#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include <conetest/calibration.hpp>
#include <conetest/sample.hpp>

namespace conetest::cli {

using Json = nlohmann::ordered_json;

/// Invalid flags or flag combinations; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a64(std::string_view bytes);

/// Everything needed to re-run a command. The worker count is left out on
/// purpose: it never changes results.
struct RunManifest {
  std::string command;
  std::vector<std::string> input_paths;
  std::vector<std::string> input_digests;  // FNV-1a of each input's bytes
  std::optional<std::uint64_t> seed;
  Json config;  // resolved options
  std::string tool_version = CONETEST_VERSION;

  std::string config_digest() const;
  Json to_json() const;
};

/// Records a path and the digest of its current contents.
void add_input(RunManifest& manifest, const std::string& path);

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Json to_json(const MixtureWeights& w);

/// Stable serialization: two-space indent, trailing newline.
std::string render(const Json& report);

/// Writes to `path`, or to stdout when path is empty or "-".
void write_output(const std::string& text, const std::string& path);

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

}  // namespace conetest::cli
