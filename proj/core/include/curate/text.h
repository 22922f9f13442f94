// Copyright 2026 The Curate Authors. All Rights Reserved.
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

#ifndef CURATE_TEXT_H_
#define CURATE_TEXT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace curate {

// Shortest round-trip decimal form.
std::string FormatDouble(double v);

std::optional<double> ParseDouble(std::string_view s);
std::optional<long long> ParseInt(std::string_view s);

std::vector<std::string_view> SplitWhitespace(std::string_view line);
std::string_view Trim(std::string_view s);

}  // namespace curate

#endif  // CURATE_TEXT_H_
