#pragma once

#include <stdexcept>
#include <string>

namespace ncc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or configuration: unlabeled logs, unknown causes,
// overlapping marker sets, an empty discriminative vocabulary.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A file or directory could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A persisted artifact (table, model, manifest) is corrupt or has the
// wrong version. The message names the offending field.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncc
