#pragma once

#include <stdexcept>
#include <string>

namespace mapfast {

// Unreadable/unwritable files and malformed file contents.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace mapfast
