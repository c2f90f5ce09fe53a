// include/avwws/manifest.hpp

// Copyright 2026  The avwws Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Utterance manifests: a '#' header line, then one tab-separated record per
// line, "id audio video features label split". Missing paths are "-".
// Relative paths are resolved against the manifest's directory.

#include <string>
#include <vector>

namespace avwws {

struct ManifestRecord {
  std::string id;
  std::string audio;     // absolute after load, empty when absent
  std::string video;
  std::string features;
  int label = 0;
  std::string split = "train";

  bool operator==(const ManifestRecord&) const = default;
};

struct Manifest {
  std::vector<ManifestRecord> records;

  /// Unique ids, binary labels, known splits.
  void validate() const;
  std::vector<ManifestRecord> split(const std::string& name) const;
};

bool is_valid_split(const std::string& s);

Manifest read_manifest(const std::string& path);
/// Paths are written relative to the manifest's directory.
void write_manifest(const std::string& path, const Manifest& m);

}  // namespace avwws
