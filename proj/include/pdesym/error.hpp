#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pdesym {

enum class ErrorKind {
  Syntax,
  UnknownSymbol,
  UnsupportedNode,
  Decode,
  DivisionByZero,
  CflViolation,
  NonFinite,
  ZeroCoefficient,
  AllWeightsDegenerate,
  DegenerateReference,
  NotSolvable,
  Io,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ErrorKind::UnsupportedNode: return "UnsupportedNode";
    case ErrorKind::Decode: return "DecodeError";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::CflViolation: return "CFLViolation";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::ZeroCoefficient: return "ZeroCoefficient";
    case ErrorKind::AllWeightsDegenerate: return "AllWeightsDegenerate";
    case ErrorKind::DegenerateReference: return "DegenerateReference";
    case ErrorKind::NotSolvable: return "NotSolvable";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

/// Numeric failures map to CLI exit code 3, everything else to 2.
constexpr bool is_numeric(ErrorKind k) {
  switch (k) {
    case ErrorKind::DivisionByZero:
    case ErrorKind::CflViolation:
    case ErrorKind::NonFinite:
    case ErrorKind::AllWeightsDegenerate:
    case ErrorKind::DegenerateReference:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::optional<std::size_t> offset = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), offset_(offset) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Byte offset into the source string, set for parse errors.
  std::optional<std::size_t> offset() const noexcept { return offset_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> offset_;
};

}  // namespace pdesym
