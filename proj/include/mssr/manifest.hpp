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

// Dataset manifests.
//
// One entry per line, tab separated:
//
//   id <TAB> lr_path <TAB> hr_path <TAB> camera_tag <TAB> split
//
// Trailing columns may be omitted. Blank lines and lines starting with '#'
// are ignored. Relative paths resolve against the manifest's directory. An
// empty or "-" hr_path means no reference image. The camera tag is written
// as "camN" (a bare "N" is accepted); when empty or "-" it is inferred from a
// "camN_" prefix of the id or of the LR file name, and 0 means untagged.

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mssr {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ManifestEntry {
  std::string id;
  std::filesystem::path lr_path;  // absolute after loading
  std::filesystem::path hr_path;  // empty when absent
  int camera = 0;
  std::string split;

  bool has_hr() const { return !hr_path.empty(); }
  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  /// Entries whose split equals `name`, order preserved.
  DatasetManifest filter_split(std::string_view name) const;
};

enum class ManifestMode {
  inference,  // hr_path optional
  paired,     // every entry needs hr_path
};

/// "cam2_06" -> 2; the tag must start the name and be followed by '_' or end.
std::optional<int> camera_from_name(std::string_view name);

/// Parses manifest text; `root` anchors relative paths. File existence is not
/// checked here.
DatasetManifest parse_manifest(std::string_view text,
                               const std::filesystem::path& root,
                               ManifestMode mode = ManifestMode::paired);

/// Reads, parses and validates (every referenced file must exist).
DatasetManifest load_manifest(const std::filesystem::path& path,
                              ManifestMode mode = ManifestMode::paired);

/// Writes entries with paths made relative to the output file's directory
/// where possible.
void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

std::string format_manifest(const DatasetManifest& manifest,
                            const std::filesystem::path& root);

/// Partition by camera 1 / camera 2. Untagged entries and other camera ids
/// are errors.
std::pair<DatasetManifest, DatasetManifest> split_by_camera(
    const DatasetManifest& manifest);

}  // namespace mssr
