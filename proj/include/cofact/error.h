/*
 * Copyright 2026 The CoFact Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef COFACT_ERROR_H_
#define COFACT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cofact {

// Coarse error category. The service maps these onto HTTP status codes and
// the CLI onto exit codes.
enum class ErrorCode {
  kInvalidArgument,  // Validation failure of user input.
  kParse,            // Malformed CSV, filter expression, or JSON document.
  kNotFound,         // Unknown feature, node, session, or fixture.
  kEmptySubset,      // Included or excluded subset is empty.
  kNumerical,        // Non-finite intermediate result.
  kIo,               // File could not be read or written.
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cofact

#endif  // COFACT_ERROR_H_
