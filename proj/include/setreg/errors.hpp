#pragma once

#include <stdexcept>
#include <string>

namespace setreg {

/// Raised for undecodable or unsupported raster and sidecar files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace setreg
