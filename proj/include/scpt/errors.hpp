#pragma once

#include <stdexcept>
#include <string>

namespace scpt {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

// SMILES text that violates the grammar (unbalanced brackets, dangling ring
// closures, stray characters).
class SyntaxError : public Error {
 public:
  using Error::Error;
};

// Implied valence exceeds the supported maximum for the element.
class ValenceError : public Error {
 public:
  using Error::Error;
};

// Syntactically valid input outside the supported subset (isotopes,
// wildcards, multi-component strings).
class UnsupportedFeature : public Error {
 public:
  using Error::Error;
};

// Tanimoto over fingerprints of different widths.
class WidthMismatch : public Error {
 public:
  using Error::Error;
};

// A PropertySpec references a name absent from a profile.
class MissingProperty : public Error {
 public:
  explicit MissingProperty(const std::string &name)
      : Error("missing property: " + name), name_(name) {}
  const std::string &name() const { return name_; }

 private:
  std::string name_;
};

// File-backed oracle has no row for a canonical form.
class OracleMiss : public Error {
 public:
  explicit OracleMiss(const std::string &canonical)
      : Error("oracle miss: " + canonical), canonical_(canonical) {}
  const std::string &canonical() const { return canonical_; }

 private:
  std::string canonical_;
};

// Exhaustive tree edit distance invoked beyond its size bound.
class SizeLimitExceeded : public Error {
 public:
  using Error::Error;
};

// All-pairs mining requested on a corpus above the guard limit.
class CorpusTooLarge : public Error {
 public:
  using Error::Error;
};

class EmptyBatch : public Error {
 public:
  using Error::Error;
};

// Relative improvement against a near-zero baseline property value.
class DegenerateBaseline : public Error {
 public:
  explicit DegenerateBaseline(const std::string &name)
      : Error("degenerate baseline for property: " + name) {}
};

// Training loss became non-finite.
class DivergenceDetected : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// I/O failures, annotated with file (and line where known).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace scpt
