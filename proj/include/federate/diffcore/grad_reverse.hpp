// Copyright 2026 The federate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "federate/common.hpp"

namespace federate {

// Identity on the way forward; multiplies the incoming gradient by -lambda on
// the way back, so whatever sits upstream ascends the downstream loss.
class GradientReversal {
 public:
  explicit GradientReversal(double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0)) {
      throw ParameterError("gradient reversal needs lambda >= 0");
    }
  }

  double lambda() const { return lambda_; }

  const Matrix& forward(const Matrix& x) const { return x; }

  Matrix backward(const Matrix& upstream) const { return -lambda_ * upstream; }

 private:
  double lambda_;
};

}  // namespace federate
