#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <sys/types.h>
#include <vector>

namespace vam {

/// Child process with line-oriented stdin/stdout pipes. stderr is discarded.
class Subprocess {
 public:
  /// Throws Error(EngineSpawnFailure) if the program cannot be executed.
  explicit Subprocess(const std::vector<std::string>& argv);
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;
  Subprocess(Subprocess&& other) noexcept;
  Subprocess& operator=(Subprocess&& other) noexcept;

  /// Returns false if the child has closed its stdin.
  bool write_line(const std::string& line);
  /// Next line without the trailing newline; nullopt on timeout or EOF.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  bool eof() const noexcept { return eof_; }

  /// Closes pipes and reaps the child, killing it if it does not exit promptly.
  void terminate();

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  bool eof_ = false;
};

}  // namespace vam
