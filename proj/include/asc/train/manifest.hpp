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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asc/features/feature_io.hpp"
#include "asc/scenes.hpp"
#include "asc/util/error.hpp"

namespace asc {

struct ManifestEntry {
  std::string path;   // audio file, relative to the corpus root
  std::string label;  // normalized scene name
  std::vector<std::string> tags;  // any further columns (city/location id, device)

  std::string clip_id() const { return clip_id_for(path); }
  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

namespace manifest_detail {
inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) out.push_back(field);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

inline std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  const auto last = s.find_last_not_of(ws);
  s.erase(last == std::string::npos ? 0 : last + 1);
  return s;
}
}  // namespace manifest_detail

// Tab-separated `filename<TAB>scene_label[<TAB>tag...]`. A first row whose
// first column reads "filename" is treated as a header.
inline DatasetManifest parse_manifest(std::istream& in, const std::vector<std::string>& labels = default_scenes(),
                                      const std::string& source = "manifest") {
  DatasetManifest m;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (manifest_detail::trim(line).empty()) continue;
    auto fields = manifest_detail::split_tabs(line);
    for (auto& f : fields) f = manifest_detail::trim(f);
    if (first) {
      first = false;
      if (normalize_label(fields[0]) == "filename") continue;
    }
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() < 2 || fields[0].empty())
      fail(ErrorKind::InvalidArgument, where + ": expected filename<TAB>scene_label");
    const auto idx = scene_index(labels, fields[1]);
    if (!idx) fail(ErrorKind::UnknownLabel, where + ": unknown scene label \"" + fields[1] + "\"");
    if (!seen.insert(fields[0]).second) fail(ErrorKind::DuplicatePath, where + ": duplicate path " + fields[0]);
    ManifestEntry e{fields[0], labels[*idx], {fields.begin() + 2, fields.end()}};
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) fail(ErrorKind::EmptyManifest, source + ": no entries");
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path,
                                     const std::vector<std::string>& labels = default_scenes()) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open manifest " + path.string());
  return parse_manifest(in, labels, path.string());
}

inline void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write manifest " + path.string());
  out << "filename\tscene_label\n";
  for (const auto& e : m.entries) {
    out << e.path << '\t' << e.label;
    for (const auto& t : e.tags) out << '\t' << t;
    out << '\n';
  }
}

}  // namespace asc
