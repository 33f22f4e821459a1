// Copyright 2026 The friendsim Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace friendsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Two subsystems with the same label were combined.
class LabelCollision : public Error {
  public:
    using Error::Error;
};

/// A label was requested that the composite space does not contain.
class UnknownSubsystem : public Error {
  public:
    using Error::Error;
};

/// Dimensions, factor counts or factor sets do not line up.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// The pointer factor was not in its ready state before coupling.
class PointerNotReady : public Error {
  public:
    using Error::Error;
};

/// A heralded post-selection has (numerically) zero success probability.
class HeraldImpossible : public Error {
  public:
    using Error::Error;
};

/// A numerical invariant (normalization, hermiticity, Tsirelson ceiling, ...)
/// was violated during a computation.
class InvariantViolation : public Error {
  public:
    using Error::Error;
};

}  // namespace friendsim
