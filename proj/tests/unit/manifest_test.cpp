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


#include <gtest/gtest.h>

#include <fstream>

#include "mssr/manifest.hpp"
#include "support/oracles.hpp"

namespace mssr {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

TEST(Manifest, CameraFromName) {
  EXPECT_EQ(camera_from_name("cam2_06"), 2);
  EXPECT_EQ(camera_from_name("cam1"), 1);
  EXPECT_EQ(camera_from_name("cam12_x.png"), 12);
  EXPECT_EQ(camera_from_name("camera_1"), std::nullopt);
  EXPECT_EQ(camera_from_name("img_cam1"), std::nullopt);
  EXPECT_EQ(camera_from_name("cam"), std::nullopt);
}

TEST(Manifest, ParsesFieldsAndDefaults) {
  const std::string text =
      "# comment\n"
      "\n"
      "a\tlr/a.png\thr/a.png\tcam1\ttrain\n"
      "cam2_06\tlr/b.png\thr/b.png\n"
      "c\tlr/cam1_c.png\t/abs/c.png\t2\t-\n"
      "d\tlr/d.png\thr/d.png\t-\tval\r\n";
  const DatasetManifest m = parse_manifest(text, "/data");
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(m.entries[0].lr_path, fs::path("/data/lr/a.png"));
  EXPECT_EQ(m.entries[0].camera, 1);
  EXPECT_EQ(m.entries[0].split, "train");
  EXPECT_EQ(m.entries[1].camera, 2);  // from the id
  EXPECT_EQ(m.entries[2].camera, 2);  // explicit tag wins over the filename
  EXPECT_EQ(m.entries[2].hr_path, fs::path("/abs/c.png"));
  EXPECT_EQ(m.entries[2].split, "");
  EXPECT_EQ(m.entries[3].camera, 0);
  EXPECT_EQ(m.entries[3].split, "val");
  EXPECT_EQ(m.filter_split("val").size(), 1u);
}

TEST(Manifest, CameraFallsBackToLrFilename) {
  const DatasetManifest m = parse_manifest("x\tcam1_03.png\thr.png\n", "/r");
  EXPECT_EQ(m.entries[0].camera, 1);
}

TEST(Manifest, RejectsMalformedInput) {
  EXPECT_THROW(parse_manifest("only-one-field\n", "/"), ManifestError);
  EXPECT_THROW(parse_manifest("a\tb\tc\td\te\tf\n", "/"), ManifestError);
  EXPECT_THROW(parse_manifest("a\t-\thr.png\n", "/"), ManifestError);
  EXPECT_THROW(parse_manifest("a\tl.png\th.png\na\tl2.png\th2.png\n", "/"), ManifestError);
  EXPECT_THROW(parse_manifest("a\tl.png\th.png\tcamX\n", "/"), ManifestError);
  EXPECT_THROW(parse_manifest("a\tl.png\n", "/", ManifestMode::paired), ManifestError);
  EXPECT_NO_THROW(parse_manifest("a\tl.png\n", "/", ManifestMode::inference));
  try {
    parse_manifest("a\tl.png\th.png\n\nb\n", "/");
    FAIL();
  } catch (const ManifestError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Manifest, LoadChecksFilesAndResolvesRelativeToManifest) {
  TempDir dir("manifest");
  fs::create_directories(dir.path() / "sub");
  std::ofstream(dir.path() / "sub" / "lr.png") << "x";
  std::ofstream(dir.path() / "sub" / "hr.png") << "x";
  std::ofstream(dir.path() / "m.tsv") << "a\tsub/lr.png\tsub/hr.png\n";
  const DatasetManifest m = load_manifest(dir.path() / "m.tsv");
  EXPECT_EQ(m.entries[0].lr_path, (dir.path() / "sub" / "lr.png").lexically_normal());
  std::ofstream(dir.path() / "bad.tsv") << "a\tsub/lr.png\tsub/none.png\n";
  EXPECT_THROW(load_manifest(dir.path() / "bad.tsv"), ManifestError);
  EXPECT_THROW(load_manifest(dir.path() / "absent.tsv"), ManifestError);
}

TEST(Manifest, SaveParseRoundtrip) {
  TempDir dir("manifest");
  DatasetManifest m{dir.path(), {}};
  m.entries.push_back({"a", dir.path() / "lr" / "a.png", dir.path() / "hr" / "a.png", 1, "train"});
  m.entries.push_back({"b", dir.path() / "lr" / "b.png", {}, 0, ""});
  m.entries.push_back({"c", "/elsewhere/c.png", "/elsewhere/hc.png", 2, "val"});
  const fs::path path = dir.path() / "m.tsv";
  save_manifest(m, path);
  std::ifstream in(path);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(text.find("a\tlr/a.png\thr/a.png\tcam1\ttrain"), std::string::npos);
  const DatasetManifest back = parse_manifest(text, path.parent_path(), ManifestMode::inference);
  EXPECT_EQ(back.entries, m.entries);
}

TEST(Manifest, SplitByCamera) {
  const DatasetManifest m = parse_manifest(
      "a\tl\th\tcam1\nb\tl\th\tcam2\nc\tl\th\tcam1\n", "/");
  const auto [one, two] = split_by_camera(m);
  ASSERT_EQ(one.size(), 2u);
  ASSERT_EQ(two.size(), 1u);
  EXPECT_EQ(one.entries[1].id, "c");
  EXPECT_THROW(split_by_camera(parse_manifest("a\tl\th\n", "/")), ManifestError);
  EXPECT_THROW(split_by_camera(parse_manifest("a\tl\th\tcam3\n", "/")), ManifestError);
}

}  // namespace
}  // namespace mssr
