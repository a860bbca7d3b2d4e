// Copyright 2026 The bcnn-asc Authors
// SPDX-License-Identifier: Apache-2.0
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

#include <stdexcept>
#include <string>
#include <string_view>

namespace asc {

// Every failure the library reports. One enumerator per contract error so
// callers (and tests) can branch on the kind rather than parse messages.
enum class ErrorKind {
  // audio-io
  MalformedContainer,
  UnsupportedEncoding,
  TruncatedData,
  RateMismatch,
  DurationOutOfTolerance,
  // dsp-core
  LengthTooSmall,
  ClipShorterThanWindow,
  DegenerateBand,
  BinMismatch,
  // features / model files
  ShapeMismatch,
  VersionMismatch,
  CorruptFile,
  SpecHashMismatch,
  // nn-core
  ChannelMismatch,
  WindowTooLarge,
  SpatialMismatch,
  DimMismatch,
  LabelOutOfRange,
  NoTrace,
  PositionCountMismatch,
  // train-eval
  UnknownLabel,
  DuplicatePath,
  EmptyManifest,
  SceneTooSmall,
  MissingFeature,
  NonFiniteLoss,
  // general
  InvalidArgument,
  InvalidConfig,
  Io,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedContainer: return "MalformedContainer";
    case ErrorKind::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorKind::TruncatedData: return "TruncatedData";
    case ErrorKind::RateMismatch: return "RateMismatch";
    case ErrorKind::DurationOutOfTolerance: return "DurationOutOfTolerance";
    case ErrorKind::LengthTooSmall: return "LengthTooSmall";
    case ErrorKind::ClipShorterThanWindow: return "ClipShorterThanWindow";
    case ErrorKind::DegenerateBand: return "DegenerateBand";
    case ErrorKind::BinMismatch: return "BinMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::SpecHashMismatch: return "SpecHashMismatch";
    case ErrorKind::ChannelMismatch: return "ChannelMismatch";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::SpatialMismatch: return "SpatialMismatch";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::NoTrace: return "NoTrace";
    case ErrorKind::PositionCountMismatch: return "PositionCountMismatch";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::DuplicatePath: return "DuplicatePath";
    case ErrorKind::EmptyManifest: return "EmptyManifest";
    case ErrorKind::SceneTooSmall: return "SceneTooSmall";
    case ErrorKind::MissingFeature: return "MissingFeature";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace asc
