#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace casebook {

/// Every failure the library reports. The enumerator names double as the
/// machine-readable codes used by the HTTP facade and the CLI.
enum class Errc {
  // text pipeline
  InvalidText,
  EmptyAfterCleaning,
  EmptyFile,
  MalformedLine,
  DimensionMismatch,
  NoCoverage,
  // similarity
  ZeroVector,
  EmptySet,
  ZeroNorm,
  InvalidArgument,
  // case memory
  SchemaError,
  InvalidPersonality,
  DuplicateRecord,
  NotAccepted,
  CorruptStore,
  // engine
  EmptyCaseBase,
  MetricUnavailable,
  // review
  UnknownTicket,
  UnknownExpert,
  AlreadyVoted,
  TicketClosed,
  JustificationRequired,
  // ingestion
  MalformedRecord,
  EmptyDump,
  // plumbing
  Io,
  InvalidConfig,
};

constexpr std::string_view to_string(Errc e) noexcept {
  switch (e) {
    case Errc::InvalidText: return "invalid_text";
    case Errc::EmptyAfterCleaning: return "empty_after_cleaning";
    case Errc::EmptyFile: return "empty_file";
    case Errc::MalformedLine: return "malformed_line";
    case Errc::DimensionMismatch: return "dimension_mismatch";
    case Errc::NoCoverage: return "no_coverage";
    case Errc::ZeroVector: return "zero_vector";
    case Errc::EmptySet: return "empty_set";
    case Errc::ZeroNorm: return "zero_norm";
    case Errc::InvalidArgument: return "invalid_argument";
    case Errc::SchemaError: return "schema_error";
    case Errc::InvalidPersonality: return "invalid_personality";
    case Errc::DuplicateRecord: return "duplicate_record";
    case Errc::NotAccepted: return "not_accepted";
    case Errc::CorruptStore: return "corrupt_store";
    case Errc::EmptyCaseBase: return "empty_case_base";
    case Errc::MetricUnavailable: return "metric_unavailable";
    case Errc::UnknownTicket: return "unknown_ticket";
    case Errc::UnknownExpert: return "unknown_expert";
    case Errc::AlreadyVoted: return "already_voted";
    case Errc::TicketClosed: return "ticket_closed";
    case Errc::JustificationRequired: return "justification_required";
    case Errc::MalformedRecord: return "malformed_record";
    case Errc::EmptyDump: return "empty_dump";
    case Errc::Io: return "io_error";
    case Errc::InvalidConfig: return "invalid_config";
  }
  return "unknown";
}

/// Exception carrying an error code plus an optional position (1-based line
/// number or 0-based record index, depending on the operation).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail, std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail),
        position_(position) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  Errc code_;
  std::string detail_;
  std::optional<std::size_t> position_;
};

}  // namespace casebook
