//
// Copyright 2026 The divaudit Authors.
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
//

// Feature files: delimited UTF-8 text with header `id,label,f0,...,f{d-1}`.
// `label` is 0, 1 or empty. Rows must share the header's dimension, every
// coordinate must be finite and no vector may be all zeros.

#ifndef DIVAUDIT_IO_HPP_
#define DIVAUDIT_IO_HPP_

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <fmt/format.h>

#include "divaudit/core.hpp"
#include "divaudit/errors.hpp"

namespace divaudit {

struct FeatureRecord {
  std::string id;
  std::optional<Label> label;
  FeatureVector x;
};

struct FeatureTable {
  std::vector<FeatureRecord> records;
  std::size_t dim = 0;

  bool fully_labeled() const {
    for (const auto& r : records) {
      if (!r.label) return false;
    }
    return true;
  }

  // Labels are carried as hidden labels only when every row has one.
  Collection to_collection() const {
    Collection s;
    s.elements.reserve(records.size());
    for (const auto& r : records) s.elements.push_back(r.x);
    if (!records.empty() && fully_labeled()) {
      std::vector<Label> labels;
      for (const auto& r : records) labels.push_back(*r.label);
      s.hidden_labels = std::move(labels);
    }
    return s;
  }

  std::vector<LabeledExample> labeled() const {
    std::vector<LabeledExample> out;
    out.reserve(records.size());
    for (const auto& r : records) {
      if (!r.label) {
        throw AuditError(ErrorCode::kParseError, "row '" + r.id + "' has no label");
      }
      out.push_back({r.x, *r.label});
    }
    return out;
  }

  ControlSet to_control_set() const {
    ControlSet t;
    for (const auto& e : labeled()) t.group(e.z).push_back(e.x);
    return t;
  }
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

}  // namespace detail

inline FeatureTable read_feature_table(std::istream& in, char delim = ',') {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) {
    throw AuditError(ErrorCode::kParseError, "feature file is empty");
  }
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  const auto header = detail::split_fields(detail::trim(line), delim);
  if (header.size() < 3 || detail::trim(header[0]) != "id" || detail::trim(header[1]) != "label") {
    throw AuditError(ErrorCode::kParseError, "header must be id,label,f0,...");
  }
  FeatureTable table;
  table.dim = header.size() - 2;
  for (std::size_t j = 0; j < table.dim; ++j) {
    if (detail::trim(header[j + 2]) != "f" + std::to_string(j)) {
      throw AuditError(ErrorCode::kParseError,
                       "header column " + std::to_string(j + 2) + " must be f" + std::to_string(j));
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = detail::trim(line);
    if (row.empty()) continue;
    const auto fields = detail::split_fields(row, delim);
    if (fields.size() != table.dim + 2) {
      throw AuditError(ErrorCode::kDimensionMismatch,
                       detail::where(line_no) + "expected " + std::to_string(table.dim + 2) +
                           " fields, got " + std::to_string(fields.size()));
    }
    FeatureRecord rec;
    rec.id = std::string(detail::trim(fields[0]));
    const std::string_view label = detail::trim(fields[1]);
    if (label == "0") {
      rec.label = Label::kZero;
    } else if (label == "1") {
      rec.label = Label::kOne;
    } else if (!label.empty()) {
      throw AuditError(ErrorCode::kParseError,
                       detail::where(line_no) + "label must be 0, 1 or empty");
    }
    std::vector<double> values(table.dim);
    for (std::size_t j = 0; j < table.dim; ++j) {
      const std::string_view tok = detail::trim(fields[j + 2]);
      const char* first = tok.data();
      const char* last = tok.data() + tok.size();
      if (!tok.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, values[j]);
      if (tok.empty() || ec != std::errc() || ptr != last) {
        throw AuditError(ErrorCode::kParseError,
                         detail::where(line_no) + "bad number '" + std::string(tok) + "'");
      }
    }
    try {
      rec.x = FeatureVector(std::move(values));
    } catch (const AuditError& e) {
      throw AuditError(e.code(), detail::where(line_no) + e.what());
    }
    if (rec.x.norm() == 0.0) {
      throw AuditError(ErrorCode::kZeroVector, detail::where(line_no) + "all-zero feature vector");
    }
    table.records.push_back(std::move(rec));
  }
  return table;
}

inline FeatureTable read_feature_file(const std::string& path, char delim = ',') {
  std::ifstream in(path);
  if (!in) throw AuditError(ErrorCode::kParseError, "cannot open " + path);
  return read_feature_table(in, delim);
}

// Coordinates are written in shortest round-trip form.
inline void write_feature_table(std::ostream& out, const FeatureTable& table, char delim = ',') {
  out << "id" << delim << "label";
  for (std::size_t j = 0; j < table.dim; ++j) out << delim << 'f' << j;
  out << '\n';
  for (const auto& r : table.records) {
    if (r.x.dim() != table.dim) {
      throw AuditError(ErrorCode::kDimensionMismatch, "record '" + r.id + "' has wrong dimension");
    }
    out << r.id << delim;
    if (r.label) out << to_int(*r.label);
    for (double v : r.x.values()) out << delim << fmt::format("{}", v);
    out << '\n';
  }
}

inline void write_feature_file(const std::string& path, const FeatureTable& table,
                               char delim = ',') {
  std::ofstream out(path);
  if (!out) throw AuditError(ErrorCode::kParseError, "cannot write " + path);
  write_feature_table(out, table, delim);
}

inline FeatureTable table_from_labeled(const std::vector<LabeledExample>& labeled,
                                       const std::string& id_prefix = "x") {
  FeatureTable table;
  table.dim = labeled.empty() ? 0 : labeled.front().x.dim();
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    table.records.push_back({id_prefix + std::to_string(i), labeled[i].z, labeled[i].x});
  }
  return table;
}

inline FeatureTable table_from_control(const ControlSet& t) {
  return table_from_labeled(t.as_labeled(), "t");
}

}  // namespace divaudit

#endif  // DIVAUDIT_IO_HPP_
