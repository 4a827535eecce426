#pragma once

// Shared helpers for the test binaries.

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace vam::test {

namespace fs = std::filesystem;

inline fs::path data_dir() { return VAM_TEST_DATA_DIR; }

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Engine from $VAM_ENGINE, else the configured default; empty when neither
// is executable.
inline std::optional<std::string> engine_path() {
  const char* env = std::getenv("VAM_ENGINE");
  const std::string path = env && *env ? env : VAM_DEFAULT_ENGINE;
  if (path.empty() || ::access(path.c_str(), X_OK) != 0) return std::nullopt;
  return path;
}

inline fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("vam_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Executable wrapper around the scripted fake engine in the given mode.
inline std::string fake_engine(const std::string& mode) {
  const auto dir = fs::temp_directory_path() / ("vam_fake_uci_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto path = dir / mode;
  if (!fs::exists(path)) {
    std::ofstream out(path);
    out << "#!/bin/sh\nexec python3 '" << (data_dir() / "fixtures" / "fake_uci.py").string() << "' " << mode << "\n";
    out.close();
    fs::permissions(path, fs::perms::owner_all);
  }
  return path.string();
}

}  // namespace vam::test
