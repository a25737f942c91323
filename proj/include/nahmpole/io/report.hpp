// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nahmpole/error.hpp"

namespace nahmpole {

/// Line-oriented run report: key=value lines, then fenced tables, then `status=ok|fail`.
class Report {
 public:
  struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
  };

  static std::string number(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
  }

  void set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : values_) {
      if (k == key) {
        v = value;
        return;
      }
    }
    values_.emplace_back(key, value);
  }
  /// Adds a line even when the key is already present (repeatable config keys).
  void append(const std::string& key, const std::string& value) { values_.emplace_back(key, value); }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value) { set(key, number(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

  Table& table(const std::string& name, std::vector<std::string> columns) {
    tables_.push_back({name, std::move(columns), {}});
    return tables_.back();
  }

  static void add_row(Table& t, const std::vector<double>& row) {
    if (row.size() != t.columns.size()) throw InvariantError("table row width does not match its header");
    std::vector<std::string> cells;
    for (double v : row) cells.push_back(number(v));
    t.rows.push_back(std::move(cells));
  }

  /// Records a pass/fail check; any failing check turns the final status to fail.
  void check(const std::string& key, bool ok) {
    set(key, ok);
    if (!ok) ok_ = false;
  }
  void fail() { ok_ = false; }
  bool ok() const { return ok_; }

  std::string get(const std::string& key) const {
    for (const auto& [k, v] : values_) {
      if (k == key) return v;
    }
    return {};
  }
  bool has(const std::string& key) const {
    for (const auto& [k, v] : values_) {
      if (k == key) return true;
    }
    return false;
  }
  const std::deque<Table>& tables() const { return tables_; }

  std::string str() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) os << k << "=" << v << "\n";
    for (const auto& t : tables_) {
      os << "```table " << t.name << "\n";
      for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "\t" : "") << t.columns[c];
      os << "\n";
      for (const auto& r : t.rows) {
        for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "\t" : "") << r[c];
        os << "\n";
      }
      os << "```\n";
    }
    os << "status=" << (ok_ ? "ok" : "fail") << "\n";
    return os.str();
  }

  void write(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open report '" + path + "' for writing");
    os << str();
  }

 private:
  std::vector<std::pair<std::string, std::string>> values_;
  std::deque<Table> tables_;  // stable references across table()
  bool ok_ = true;
};

}  // namespace nahmpole
