#include "vam/error.hpp"

namespace vam {

ErrorFamily family_of(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EngineSpawnFailure:
    case ErrorKind::HandshakeTimeout:
    case ErrorKind::UnsupportedOption:
    case ErrorKind::EngineTimeout:
    case ErrorKind::ProtocolError:
    case ErrorKind::NoBestMove:
      return ErrorFamily::Engine;
    case ErrorKind::EndpointUnavailable:
    case ErrorKind::GenerationTimeout:
      return ErrorFamily::Endpoint;
    case ErrorKind::IoFailure:
      return ErrorFamily::Io;
    case ErrorKind::ConfigError:
      return ErrorFamily::Config;
    case ErrorKind::SchemaError:
    case ErrorKind::MissingSolution:
    case ErrorKind::MalformedFen:
      return ErrorFamily::Data;
    default:
      return ErrorFamily::Usage;
  }
}

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedFen: return "MalformedFen";
    case ErrorKind::MalformedMove: return "MalformedMove";
    case ErrorKind::IllegalMove: return "IllegalMove";
    case ErrorKind::EngineSpawnFailure: return "EngineSpawnFailure";
    case ErrorKind::HandshakeTimeout: return "HandshakeTimeout";
    case ErrorKind::UnsupportedOption: return "UnsupportedOption";
    case ErrorKind::EngineTimeout: return "EngineTimeout";
    case ErrorKind::ProtocolError: return "ProtocolError";
    case ErrorKind::IllegalCandidate: return "IllegalCandidate";
    case ErrorKind::NoBestMove: return "NoBestMove";
    case ErrorKind::TerminalPosition: return "TerminalPosition";
    case ErrorKind::UnnormalizedWdl: return "UnnormalizedWdl";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::UnknownMove: return "UnknownMove";
    case ErrorKind::MissingAllowedMoves: return "MissingAllowedMoves";
    case ErrorKind::TemplateError: return "TemplateError";
    case ErrorKind::EmptyList: return "EmptyList";
    case ErrorKind::EndpointUnavailable: return "EndpointUnavailable";
    case ErrorKind::GenerationTimeout: return "GenerationTimeout";
    case ErrorKind::GroupTooSmall: return "GroupTooSmall";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::MissingSolution: return "MissingSolution";
    case ErrorKind::PolicyFailure: return "PolicyFailure";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace vam
