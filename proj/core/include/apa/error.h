// core/include/apa/error.h

// Copyright 2026  The apa-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef APA_ERROR_H_
#define APA_ERROR_H_

#include <stdexcept>
#include <string>

namespace apa {

// Base of every exception thrown by the toolkit. `module()` names the
// component that raised it; the CLI prefixes messages with it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string &what)
      : std::runtime_error(what), module_(std::move(module)) {}
  const std::string &module() const { return module_; }

 private:
  std::string module_;
};

// A score outside the scale it is declared on.
class ScaleError : public Error {
 public:
  explicit ScaleError(const std::string &what) : Error("scorekit", what) {}
};

class InvalidArgument : public Error {
 public:
  InvalidArgument(std::string module, const std::string &what)
      : Error(std::move(module), what) {}
};

}  // namespace apa

#endif  // APA_ERROR_H_
