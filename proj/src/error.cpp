// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The csisense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "csisense/error.hpp"

namespace csisense {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::ViewpointInsideTarget: return "ViewpointInsideTarget";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::InvalidPitch: return "InvalidPitch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SingleLink: return "SingleLink";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace csisense
