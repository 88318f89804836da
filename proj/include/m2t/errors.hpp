// Copyright 2026 The m2tc Authors.
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

#ifndef M2T_ERRORS_HPP_
#define M2T_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace m2t {

// Malformed or truncated files, bad magic, version mismatch.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Violated preconditions and broken invariants (caller bugs, corrupt state).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

inline void check_contract(bool ok, const std::string& what) {
  if (!ok) throw ContractError(what);
}

}  // namespace m2t

#endif  // M2T_ERRORS_HPP_
