// Copyright 2026 The covrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COVREC_ERRORS_HPP_
#define COVREC_ERRORS_HPP_

#include <stdexcept>

namespace covrec {

// Invalid inputs are reported as std::invalid_argument throughout.

/// Numerically ill-posed requests, e.g. a phase grid that cannot separate the
/// cosine and sine components of a sweep.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace covrec

#endif  // COVREC_ERRORS_HPP_
