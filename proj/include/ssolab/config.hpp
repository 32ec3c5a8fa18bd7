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

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssolab::config {

/// Raised on malformed input; carries the 1-based line number.
struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

/// Raised when a value violates a documented invariant; carries the field path.
struct ValidationError : std::runtime_error {
  std::string path;
  ValidationError(const std::string& path_, const std::string& what)
      : std::runtime_error(path_ + ": " + what), path(path_) {}
};

struct Value {
  enum class Kind { Number, Boolean, String, NumberArray, StringArray };
  Kind kind = Kind::Number;
  double number = 0.0;
  bool boolean = false;
  std::string str;
  std::vector<double> numbers;
  std::vector<std::string> strings;
  int line = 0;
  mutable bool used = false;
};

/// One `[section]` (or one element of a `[[section]]` array of tables).
class Section {
 public:
  Section(std::string name, int line) : name_(std::move(name)), line_(line) {}

  const std::string& name() const { return name_; }
  int line() const { return line_; }
  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  double get_number(const std::string& key) const;
  double get_number(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_numbers(const std::string& key) const;
  std::vector<double> get_numbers(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  void insert(const std::string& key, Value v, int line);

  /// Keys never touched by a getter; used to reject unknown keys.
  std::vector<std::string> unused_keys() const;

  std::string path(const std::string& key) const { return name_ + "." + key; }

 private:
  const Value& require(const std::string& key) const;
  std::string name_;
  int line_;
  std::map<std::string, Value> entries_;
};

/// Parsed file: ordered list of sections. Repeated `[[name]]` sections keep
/// their file order; `[name]` may appear once.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  /// Single required/optional section access.
  const Section* find(const std::string& name) const;
  const Section& require(const std::string& name) const;
  /// All sections with the given name, in file order.
  std::vector<const Section*> all(const std::string& name) const;

  /// Throws ValidationError naming the first unused (unknown) key, if any.
  void reject_unknown_keys() const;

  std::vector<Section>& sections() { return sections_; }
  const std::vector<Section>& sections() const { return sections_; }

 private:
  std::vector<Section> sections_;
};

}  // namespace ssolab::config
