#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rawisp/signal_model.hpp"

namespace rawisp::testing {

// k = 1 table: A 80, C 95, G 110, T 65 pA.
PoreModel k1_model();

// Unique scratch directory, removed with its contents on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "rawisp");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::string& path);

struct CliRun {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the rawisp executable with `args` (already shell-quoted where needed).
CliRun run_cli(const std::string& args, const TempDir& scratch);

// Path of the rawisp executable under test.
std::string cli_path();

}  // namespace rawisp::testing
