// Copyright 2026 The MSSR Authors. All Rights Reserved.
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

#include "mssr/manifest.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace mssr {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\r' || c == '\n' || c == '\t';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(trim(line.substr(start, tab - start)));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < 0) {
    return std::nullopt;
  }
  return value;
}

bool absent(std::string_view field) { return field.empty() || field == "-"; }

fs::path resolve(const fs::path& root, std::string_view field) {
  fs::path p{std::string(field)};
  return p.is_absolute() ? p.lexically_normal() : (root / p).lexically_normal();
}

}  // namespace

std::optional<int> camera_from_name(std::string_view name) {
  if (name.size() < 4 || name.substr(0, 3) != "cam") return std::nullopt;
  std::size_t end = 3;
  while (end < name.size() && name[end] >= '0' && name[end] <= '9') ++end;
  if (end == 3) return std::nullopt;
  if (end < name.size() && name[end] != '_') return std::nullopt;
  return parse_int(name.substr(3, end - 3));
}

DatasetManifest DatasetManifest::filter_split(std::string_view name) const {
  DatasetManifest out{root, {}};
  for (const auto& e : entries) {
    if (e.split == name) out.entries.push_back(e);
  }
  return out;
}

DatasetManifest parse_manifest(std::string_view text, const fs::path& root,
                               ManifestMode mode) {
  DatasetManifest manifest{root, {}};
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    const std::string where = "manifest line " + std::to_string(line_no);
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields.size() > 5 || fields[0].empty() ||
        absent(fields[1])) {
      throw ManifestError(where + ": expected id<TAB>lr_path[<TAB>hr_path"
                                  "[<TAB>camera_tag[<TAB>split]]]");
    }
    ManifestEntry entry;
    entry.id = std::string(fields[0]);
    if (!ids.insert(entry.id).second) {
      throw ManifestError(where + ": duplicate id '" + entry.id + "'");
    }
    entry.lr_path = resolve(root, fields[1]);
    if (fields.size() > 2 && !absent(fields[2])) {
      entry.hr_path = resolve(root, fields[2]);
    }
    if (mode == ManifestMode::paired && !entry.has_hr()) {
      throw ManifestError(where + ": entry '" + entry.id +
                          "' has no HR path");
    }
    if (fields.size() > 3 && !absent(fields[3])) {
      std::string_view tag = fields[3];
      if (tag.substr(0, 3) == "cam") tag.remove_prefix(3);
      const auto cam = parse_int(tag);
      if (!cam) {
        throw ManifestError(where + ": bad camera tag '" +
                            std::string(fields[3]) + "'");
      }
      entry.camera = *cam;
    } else {
      auto cam = camera_from_name(entry.id);
      if (!cam) cam = camera_from_name(entry.lr_path.filename().string());
      entry.camera = cam.value_or(0);
    }
    if (fields.size() > 4 && !absent(fields[4])) {
      entry.split = std::string(fields[4]);
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

DatasetManifest load_manifest(const fs::path& path, ManifestMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot read manifest '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const fs::path root = fs::absolute(path).parent_path();
  DatasetManifest manifest = parse_manifest(buffer.str(), root, mode);
  for (const auto& e : manifest.entries) {
    if (!fs::is_regular_file(e.lr_path)) {
      throw ManifestError("entry '" + e.id + "': missing LR file '" +
                          e.lr_path.string() + "'");
    }
    if (e.has_hr() && !fs::is_regular_file(e.hr_path)) {
      throw ManifestError("entry '" + e.id + "': missing HR file '" +
                          e.hr_path.string() + "'");
    }
  }
  return manifest;
}

std::string format_manifest(const DatasetManifest& manifest,
                            const fs::path& root) {
  const auto rel = [&](const fs::path& p) {
    if (p.empty()) return std::string("-");
    const fs::path r = p.lexically_relative(root);
    return (r.empty() || *r.begin() == "..") ? p.string() : r.string();
  };
  std::ostringstream out;
  out << "# id\tlr_path\thr_path\tcamera_tag\tsplit\n";
  for (const auto& e : manifest.entries) {
    out << e.id << '\t' << rel(e.lr_path) << '\t' << rel(e.hr_path) << '\t'
        << (e.camera > 0 ? "cam" + std::to_string(e.camera) : "-") << '\t'
        << (e.split.empty() ? "-" : e.split) << '\n';
  }
  return out.str();
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const fs::path root = fs::absolute(path).parent_path();
  if (!root.empty()) fs::create_directories(root);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ManifestError("cannot write manifest '" + path.string() + "'");
  out << format_manifest(manifest, root);
  if (!out) throw ManifestError("write failed for '" + path.string() + "'");
}

std::pair<DatasetManifest, DatasetManifest> split_by_camera(
    const DatasetManifest& manifest) {
  std::pair<DatasetManifest, DatasetManifest> out{{manifest.root, {}},
                                                  {manifest.root, {}}};
  for (const auto& e : manifest.entries) {
    if (e.camera == 1) {
      out.first.entries.push_back(e);
    } else if (e.camera == 2) {
      out.second.entries.push_back(e);
    } else if (e.camera == 0) {
      throw ManifestError("entry '" + e.id + "' has no camera tag");
    } else {
      throw ManifestError("entry '" + e.id + "' has camera tag " +
                          std::to_string(e.camera) + "; expected 1 or 2");
    }
  }
  return out;
}

}  // namespace mssr
