// Copyright 2026 The keygr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace keygr {

enum class ErrorKind {
  kParse,
  kIntegrity,
  kContract,
  kDegenerate,
  kConflict,
  kUsage,
  kIo,
};

const char* error_kind_name(ErrorKind kind);

/// Base of every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& message)
      : Error(ErrorKind::kIntegrity, message) {}
};

/// Precondition violated by the caller (dead trie prefix, double removal, ...).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& message)
      : Error(ErrorKind::kContract, message) {}
};

/// Document without a single usable content term.
class DegenerateDocumentError : public Error {
 public:
  explicit DegenerateDocumentError(const std::string& message)
      : Error(ErrorKind::kDegenerate, message) {}
};

class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& message)
      : Error(ErrorKind::kConflict, message) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorKind::kUsage, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::kIo, message) {}
};

}  // namespace keygr
