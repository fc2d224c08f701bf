#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ehrcheck {

// Root of every error the engine raises. Subclasses name the contract that
// was violated so callers (and the CLI exit-code mapping) can dispatch on type.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
  using Error::Error;
};

class EmptyInput : public InputError {
public:
  explicit EmptyInput(const std::string& what, std::size_t invalid_count = 0)
      : InputError(what), invalid_count_(invalid_count) {}
  // Number of propositions dropped as invalid before the empty result.
  std::size_t invalid_count() const noexcept { return invalid_count_; }

private:
  std::size_t invalid_count_;
};

class DimensionError : public InputError {
public:
  using InputError::InputError;
};

class DuplicateError : public InputError {
public:
  using InputError::InputError;
};

class FormatError : public Error {
public:
  using Error::Error;
};

class TokenizeError : public Error {
public:
  using Error::Error;
};

class DegenerateError : public Error {
public:
  using Error::Error;
};

// Backend-side failures: transport, contract, or exhausted retry ladders.
class BackendError : public Error {
public:
  using Error::Error;
};

class BackendContractError : public BackendError {
public:
  using BackendError::BackendError;
};

struct TranscriptEntry {
  std::string kind;  // "initial", "heal", "escalate"
  double temperature = 0.0;
  std::string output;
  std::string failure;  // empty when the attempt succeeded
};

class StructuredOutputError : public BackendError {
public:
  StructuredOutputError(const std::string& what, std::vector<TranscriptEntry> transcript)
      : BackendError(what), transcript_(std::move(transcript)) {}
  const std::vector<TranscriptEntry>& transcript() const noexcept { return transcript_; }

private:
  std::vector<TranscriptEntry> transcript_;
};

class ExtractionError : public BackendError {
public:
  ExtractionError(const std::string& what, std::string raw_output)
      : BackendError(what), raw_output_(std::move(raw_output)) {}
  const std::string& raw_output() const noexcept { return raw_output_; }

private:
  std::string raw_output_;
};

class JudgeContractError : public BackendError {
public:
  using BackendError::BackendError;
};

}  // namespace ehrcheck
