// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#include "keygr/error.h"

#include <fmt/format.h>

namespace keygr {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kIntegrity: return "integrity";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kConflict: return "conflict";
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error(ErrorKind::kParse, fmt::format("{}:{}: {}", source, line, what)), line_(line) {}

}  // namespace keygr
