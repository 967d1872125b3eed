#include "cli/report.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <conetest/errors.hpp>

namespace conetest::cli {

std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunManifest::config_digest() const { return fnv1a64(config.dump()); }

Json RunManifest::to_json() const {
  Json j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["input_paths"] = input_paths;
  j["input_digests"] = input_digests;
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  j["config"] = config;
  j["config_digest"] = config_digest();
  return j;
}

void add_input(RunManifest& manifest, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  manifest.input_paths.push_back(path);
  manifest.input_digests.push_back(fnv1a64(buf.str()));
}

Json to_json(const Vector& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Json to_json(const Matrix& m) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    j.push_back(to_json(Vector(m.row(i).transpose())));
  }
  return j;
}

Json to_json(const MixtureWeights& w) {
  Json j;
  j["weights"] = w.weights;
  j["std_errors"] = w.std_errors;
  j["method"] = w.method == WeightMethod::closed_form ? "closed_form" : "monte_carlo";
  j["mc_samples"] = w.mc_samples;
  if (w.method == WeightMethod::monte_carlo) j["seed"] = w.seed;
  return j;
}

std::string render(const Json& report) { return report.dump(2) + "\n"; }

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kExitUsage;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return err->category() == ErrorCategory::input ? kExitData : kExitNumeric;
  }
  if (dynamic_cast<const Json::exception*>(&e)) return kExitData;
  return kExitNumeric;
}

}  // namespace conetest::cli
