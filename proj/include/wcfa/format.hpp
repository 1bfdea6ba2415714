// Copyright 2026 The wcfa Authors
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

#ifndef WCFA_FORMAT_HPP_
#define WCFA_FORMAT_HPP_

#include <cstdio>
#include <string>

namespace wcfa {

/// Shortest-safe decimal rendering for CSV output: 17 significant digits,
/// which round-trips every double.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace wcfa

#endif  // WCFA_FORMAT_HPP_
