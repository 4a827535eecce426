#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vam {

enum class ErrorKind {
  // chess_core
  MalformedFen,
  MalformedMove,
  IllegalMove,
  // engine_client
  EngineSpawnFailure,
  HandshakeTimeout,
  UnsupportedOption,
  EngineTimeout,
  ProtocolError,
  IllegalCandidate,
  NoBestMove,
  TerminalPosition,
  // verifier
  UnnormalizedWdl,
  EmptyMask,
  UnknownMove,
  // prompt_interface
  MissingAllowedMoves,
  TemplateError,
  EmptyList,
  // rollout
  EndpointUnavailable,
  GenerationTimeout,
  GroupTooSmall,
  LengthMismatch,
  // data_pipeline
  IoFailure,
  SchemaError,
  MissingSolution,
  PolicyFailure,
  // cli
  ConfigError,
  InvalidArgument,
};

/// Coarse grouping used by the CLI to pick an exit code.
enum class ErrorFamily { Config, Io, Engine, Endpoint, Data, Usage };

ErrorFamily family_of(ErrorKind kind) noexcept;
std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorFamily family() const noexcept { return family_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace vam
