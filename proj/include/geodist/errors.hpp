#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace geodist {

/// Record-level error while reading a corpus file. Carries the 1-based
/// line number of the offending record.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::uint64_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::uint64_t line() const { return line_; }

 private:
  std::uint64_t line_;
};

class UnknownWordError : public std::invalid_argument {
 public:
  explicit UnknownWordError(const std::string& word)
      : std::invalid_argument("unknown word: " + word), word_(word) {}

  const std::string& word() const { return word_; }

 private:
  std::string word_;
};

class UnknownRegionError : public std::invalid_argument {
 public:
  explicit UnknownRegionError(const std::string& region)
      : std::invalid_argument("unknown region: " + region), region_(region) {}

  const std::string& region() const { return region_; }

 private:
  std::string region_;
};

/// Cosine distance is undefined for a zero vector. Distinct from the
/// unknown-word case so callers can tell the two apart.
class ZeroVectorError : public std::domain_error {
 public:
  explicit ZeroVectorError(const std::string& what_arg)
      : std::domain_error(what_arg) {}
};

/// A syntactic score was requested for a word whose tagged support in at
/// least one region is below the required minimum.
class InsufficientSupportError : public std::runtime_error {
 public:
  InsufficientSupportError(const std::string& word, std::uint64_t support_i,
                           std::uint64_t support_j, std::uint64_t min_support)
      : std::runtime_error("insufficient support for '" + word +
                           "': " + std::to_string(support_i) + " vs " +
                           std::to_string(support_j) + " (need " +
                           std::to_string(min_support) + ")"),
        support_i_(support_i),
        support_j_(support_j) {}

  std::uint64_t support_i() const { return support_i_; }
  std::uint64_t support_j() const { return support_j_; }

 private:
  std::uint64_t support_i_;
  std::uint64_t support_j_;
};

/// Raw score population has zero spread; Z-scores are undefined.
class DegeneratePopulationError : public std::runtime_error {
 public:
  DegeneratePopulationError()
      : std::runtime_error("degenerate score population") {}
};

}  // namespace geodist
