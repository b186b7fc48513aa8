#include "fixtures.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>

namespace rawisp::testing {

PoreModel k1_model() { return PoreModel(1, {{80.0, 1.0}, {95.0, 1.0}, {110.0, 1.0}, {65.0, 1.0}}); }

TempDir::TempDir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    auto candidate = base / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string cli_path() { return RAWISP_CLI; }

CliRun run_cli(const std::string& args, const TempDir& scratch) {
  static std::atomic<unsigned> counter{0};
  const unsigned id = counter++;
  const std::string out = scratch.file("cli" + std::to_string(id) + ".out");
  const std::string err = scratch.file("cli" + std::to_string(id) + ".err");
  const std::string cmd = "'" + cli_path() + "' " + args + " >'" + out + "' 2>'" + err + "'";
  const int status = std::system(cmd.c_str());
  CliRun run;
  run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  run.out = read_file(out);
  run.err = read_file(err);
  return run;
}

}  // namespace rawisp::testing
