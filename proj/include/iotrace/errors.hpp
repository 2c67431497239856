// Copyright 2026 The iotrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IOTRACE_ERRORS_HPP
#define IOTRACE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iotrace {

/// Base class for all iotrace errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// interpose
struct RelocationUnreadable : Error {
  using Error::Error;
};
struct SlotWriteDenied : Error {
  using Error::Error;
};
struct AlreadyAttached : Error {
  using Error::Error;
};
struct NotAttached : Error {
  using Error::Error;
};
struct RealSymbolUnresolvable : Error {
  using Error::Error;
};

// session
struct WindowAlreadyOpen : Error {
  using Error::Error;
};
struct NoOpenWindow : Error {
  using Error::Error;
};
struct InvalidWindow : Error {
  using Error::Error;
};

// analysis
struct EmptyWindow : Error {
  using Error::Error;
};
struct EmptyManifest : Error {
  using Error::Error;
};

// export / persistence
struct IoFailure : Error {
  using Error::Error;
};
struct MalformedLog : Error {
  MalformedLog(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
  std::size_t line_number;
};
struct VersionMismatch : Error {
  using Error::Error;
};
struct NoSegments : Error {
  using Error::Error;
};

// workload / cli
struct DatasetMissing : Error {
  using Error::Error;
};
struct Unwritable : Error {
  using Error::Error;
};
struct DiskFull : Error {
  using Error::Error;
};
struct MismatchedRun : Error {
  using Error::Error;
};
struct LaunchFailure : Error {
  using Error::Error;
};

}  // namespace iotrace

#endif  // IOTRACE_ERRORS_HPP
