// Copyright 2026 The MNF Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mnf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Network or hardware description violates a structural rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Tensor shape does not match the layer it is fed into.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the 1-based line/column (text formats) or
// byte offset (binary formats) of the failure.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0,
              std::size_t column = 0, std::size_t offset = 0)
      : Error(what), line_(line), column_(column), offset_(offset) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  std::size_t offset() const { return offset_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::size_t offset_;
};

// Event metadata points outside the layer's weight filter or output plane.
class AddressError : public Error {
 public:
  using Error::Error;
};

// A layer does not fit the PE capacities, or the network needs more PEs than
// the hardware has.
class MappingError : public Error {
 public:
  using Error::Error;
};

// 32-bit partial sum left the representable range. Treated as a hard fault.
class AccumulatorOverflow : public Error {
 public:
  using Error::Error;
};

// Event-driven or cycle-level result differs from the dense reference.
class OracleMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace mnf
