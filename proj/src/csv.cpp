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

#include "ssolab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ssolab::csvio {

const std::vector<double>& Table::column(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return data[i];
  throw std::out_of_range("csv table has no column '" + name + "'");
}

bool Table::has_column(const std::string& name) const {
  for (const auto& c : columns)
    if (c == name) return true;
  return false;
}

void write(const std::string& path, const Table& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (size_t i = 0; i < t.columns.size(); ++i)
    out << (i ? "," : "") << t.columns[i];
  out << "\n";
  char buf[40];
  const size_t n = t.rows();
  for (size_t r = 0; r < n; ++r) {
    std::string line;
    for (size_t c = 0; c < t.data.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", t.data[c][r]);
      if (c) line.push_back(',');
      line += buf;
    }
    line.push_back('\n');
    out << line;
  }
}

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv file: " + path);
  std::stringstream hdr(line);
  std::string cell;
  while (std::getline(hdr, cell, ',')) t.columns.push_back(cell);
  t.data.assign(t.columns.size(), {});
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    size_t c = 0;
    while (std::getline(row, cell, ',')) {
      if (c >= t.columns.size())
        throw std::runtime_error("csv row wider than header in " + path);
      t.data[c++].push_back(std::strtod(cell.c_str(), nullptr));
    }
    if (c != t.columns.size())
      throw std::runtime_error("csv row narrower than header in " + path);
  }
  return t;
}

}  // namespace ssolab::csvio
