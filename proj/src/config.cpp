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

#include "ssolab/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ssolab::config {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Strips a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
      return false;
  }
  return true;
}

bool parse_number(const std::string& t, double& out) {
  std::string s = t;
  // std::from_chars in libstdc++ 11 handles doubles, but not leading '+'.
  if (!s.empty() && s[0] == '+') s = s.substr(1);
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

Value parse_scalar(const std::string& token, int line) {
  Value v;
  v.line = line;
  if (token.size() >= 2 && token.front() == '"' && token.back() == '"') {
    v.kind = Value::Kind::String;
    v.str = token.substr(1, token.size() - 2);
    return v;
  }
  if (token == "true" || token == "false") {
    v.kind = Value::Kind::Boolean;
    v.boolean = (token == "true");
    return v;
  }
  double num = 0.0;
  if (parse_number(token, num)) {
    v.kind = Value::Kind::Number;
    v.number = num;
    return v;
  }
  throw ParseError(line, "cannot parse value '" + token + "'");
}

Value parse_value(const std::string& text, int line) {
  std::string t = trim(text);
  if (t.empty()) throw ParseError(line, "missing value");
  if (t.front() == '[') {
    if (t.back() != ']') throw ParseError(line, "unterminated array");
    std::string inner = t.substr(1, t.size() - 2);
    Value v;
    v.line = line;
    std::vector<std::string> tokens;
    std::string cur;
    bool in_str = false;
    for (char c : inner) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        tokens.push_back(trim(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!trim(cur).empty()) tokens.push_back(trim(cur));
    bool any_string = false;
    for (const auto& tok : tokens) {
      Value s = parse_scalar(tok, line);
      if (s.kind == Value::Kind::String) {
        any_string = true;
        v.strings.push_back(s.str);
      } else if (s.kind == Value::Kind::Number) {
        v.numbers.push_back(s.number);
      } else {
        throw ParseError(line, "array elements must be numbers or strings");
      }
    }
    if (any_string && !v.numbers.empty())
      throw ParseError(line, "mixed array element types");
    v.kind = any_string ? Value::Kind::StringArray : Value::Kind::NumberArray;
    return v;
  }
  return parse_scalar(t, line);
}

}  // namespace

void Section::insert(const std::string& key, Value v, int line) {
  if (entries_.count(key))
    throw ParseError(line, "duplicate key '" + key + "' in section [" + name_ + "]");
  entries_.emplace(key, std::move(v));
}

const Value& Section::require(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    throw ValidationError(path(key), "required key is missing");
  it->second.used = true;
  return it->second;
}

double Section::get_number(const std::string& key) const {
  const Value& v = require(key);
  if (v.kind != Value::Kind::Number)
    throw ValidationError(path(key), "expected a number");
  return v.number;
}

double Section::get_number(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return get_number(key);
}

bool Section::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Value& v = require(key);
  if (v.kind != Value::Kind::Boolean)
    throw ValidationError(path(key), "expected true or false");
  return v.boolean;
}

std::string Section::get_string(const std::string& key) const {
  const Value& v = require(key);
  if (v.kind != Value::Kind::String)
    throw ValidationError(path(key), "expected a quoted string");
  return v.str;
}

std::string Section::get_string(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  return get_string(key);
}

std::vector<double> Section::get_numbers(const std::string& key) const {
  const Value& v = require(key);
  if (v.kind != Value::Kind::NumberArray)
    throw ValidationError(path(key), "expected an array of numbers");
  return v.numbers;
}

std::vector<double> Section::get_numbers(const std::string& key,
                                         std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  return get_numbers(key);
}

std::vector<std::string> Section::get_strings(const std::string& key) const {
  const Value& v = require(key);
  if (v.kind != Value::Kind::StringArray)
    throw ValidationError(path(key), "expected an array of strings");
  return v.strings;
}

std::vector<std::string> Section::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (!v.used) out.push_back(k);
  return out;
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  Section* current = nullptr;
  std::map<std::string, bool> single_seen;  // plain [name] sections seen so far
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      bool array_of_tables = line.size() >= 4 && line[1] == '[';
      size_t close = line.find(array_of_tables ? "]]" : "]");
      if (close == std::string::npos || close + (array_of_tables ? 2 : 1) != line.size())
        throw ParseError(line_no, "malformed section header '" + line + "'");
      std::string name = trim(line.substr(array_of_tables ? 2 : 1,
                                          close - (array_of_tables ? 2 : 1)));
      if (!valid_key(name)) throw ParseError(line_no, "invalid section name '" + name + "'");
      if (!array_of_tables) {
        if (single_seen[name])
          throw ParseError(line_no, "section [" + name + "] appears more than once");
        single_seen[name] = true;
      }
      cfg.sections_.emplace_back(name, line_no);
      current = &cfg.sections_.back();
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(line_no, "expected 'key = value', got '" + line + "'");
    if (current == nullptr)
      throw ParseError(line_no, "key-value pair before any [section]");
    std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) throw ParseError(line_no, "invalid key '" + key + "'");
    current->insert(key, parse_value(line.substr(eq + 1), line_no), line_no);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

const Section* Config::find(const std::string& name) const {
  for (const auto& s : sections_)
    if (s.name() == name) return &s;
  return nullptr;
}

const Section& Config::require(const std::string& name) const {
  const Section* s = find(name);
  if (!s) throw ValidationError(name, "required section is missing");
  return *s;
}

std::vector<const Section*> Config::all(const std::string& name) const {
  std::vector<const Section*> out;
  for (const auto& s : sections_)
    if (s.name() == name) out.push_back(&s);
  return out;
}

void Config::reject_unknown_keys() const {
  for (const auto& s : sections_) {
    auto unused = s.unused_keys();
    if (!unused.empty())
      throw ValidationError(s.name() + "." + unused.front(), "unknown key");
  }
}

}  // namespace ssolab::config
