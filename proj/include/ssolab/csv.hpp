// Copyright 2026 The ssolab Authors
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

#pragma once

#include <string>
#include <vector>

namespace ssolab::csvio {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // column major

  size_t rows() const { return data.empty() ? 0 : data.front().size(); }
  const std::vector<double>& column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

// Full precision (17 significant digits) so repeated runs are bit identical.
void write(const std::string& path, const Table& t);
Table read(const std::string& path);

}  // namespace ssolab::csvio
