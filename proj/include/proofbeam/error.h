// Copyright 2026 The Proofbeam Authors. All Rights Reserved.
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
// =============================================================================

#ifndef PROOFBEAM_ERROR_H_
#define PROOFBEAM_ERROR_H_

#include <stdexcept>
#include <string>

namespace proofbeam {

// Base of every exception thrown by the library. Subclasses name the violated
// contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PROOFBEAM_DEFINE_ERROR(Name)            \
  class Name : public Error {                   \
   public:                                      \
    using Error::Error;                         \
  }

// script_model
PROOFBEAM_DEFINE_ERROR(NoGoalHeader);
PROOFBEAM_DEFINE_ERROR(HeaderOverlap);
PROOFBEAM_DEFINE_ERROR(EmptyAfterStrip);
PROOFBEAM_DEFINE_ERROR(Unsalvageable);
PROOFBEAM_DEFINE_ERROR(SpanOutOfRange);

// verifier
PROOFBEAM_DEFINE_ERROR(BackendDown);
PROOFBEAM_DEFINE_ERROR(FixtureInvalid);

// proposer
PROOFBEAM_DEFINE_ERROR(BackendUnavailable);

// rerank
PROOFBEAM_DEFINE_ERROR(DimensionMismatch);
PROOFBEAM_DEFINE_ERROR(FormatVersionMismatch);
PROOFBEAM_DEFINE_ERROR(CorruptModel);

// premises
PROOFBEAM_DEFINE_ERROR(EmptyIndex);
PROOFBEAM_DEFINE_ERROR(StaleIndex);
PROOFBEAM_DEFINE_ERROR(DuplicatePremise);

// hints
PROOFBEAM_DEFINE_ERROR(LexiconInvalid);

// datalog
PROOFBEAM_DEFINE_ERROR(SinkUnavailable);
PROOFBEAM_DEFINE_ERROR(MalformedRecord);

// service
PROOFBEAM_DEFINE_ERROR(BindFailure);

#undef PROOFBEAM_DEFINE_ERROR

}  // namespace proofbeam

#endif  // PROOFBEAM_ERROR_H_
