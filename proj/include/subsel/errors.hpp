// Copyright 2026 The Authors.
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

#include <stdexcept>
#include <string>

namespace subsel {

// Every error raised by the library derives from Error. The CLI maps the
// three families (config, data, numeric) onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied an invalid parameter or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Inputs are malformed or inconsistent (files, ids, shapes of data).
class DataError : public Error {
 public:
  using Error::Error;
};

// Arithmetic could not be carried out (non-finite values, degenerate geometry).
class NumericError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

class EmptySetError : public DataError {
 public:
  using DataError::DataError;
};

class IdError : public DataError {
 public:
  using DataError::DataError;
};

class IndexError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class ParameterError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class SpecError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnsupportedError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ContractError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class GeometryError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace subsel
