// src/manifest.cpp

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

#include "avwws/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "avwws/error.hpp"

namespace fs = std::filesystem;

namespace avwws {

bool is_valid_split(const std::string& s) { return s == "train" || s == "dev" || s == "eval"; }

void Manifest::validate() const {
  std::set<std::string> seen;
  for (const ManifestRecord& r : records) {
    if (r.id.empty() || r.id.find_first_of("\t\n ") != std::string::npos) {
      throw InputError("manifest id '" + r.id + "' is empty or contains whitespace");
    }
    if (!seen.insert(r.id).second) throw InputError("duplicate manifest id '" + r.id + "'");
    if (r.label != 0 && r.label != 1) throw InputError("label of " + r.id + " is not 0 or 1");
    if (!is_valid_split(r.split)) throw InputError("split of " + r.id + " must be train, dev or eval");
  }
}

std::vector<ManifestRecord> Manifest::split(const std::string& name) const {
  std::vector<ManifestRecord> out;
  for (const ManifestRecord& r : records) {
    if (r.split == name) out.push_back(r);
  }
  return out;
}

namespace {

std::string resolve(const fs::path& base, const std::string& field) {
  if (field == "-") return {};
  fs::path p(field);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal().string();
}

std::string relative_to(const fs::path& base, const std::string& path) {
  if (path.empty()) return "-";
  const fs::path rel = fs::path(path).lexically_relative(base);
  return rel.empty() ? path : rel.string();
}

}  // namespace

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open manifest " + path);
  const fs::path base = fs::absolute(fs::path(path)).lexically_normal().parent_path();
  Manifest m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, '\t')) f.push_back(field);
    if (f.size() != 6) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected 6 tab-separated fields, got " +
                       std::to_string(f.size()));
    }
    ManifestRecord r;
    r.id = f[0];
    r.audio = resolve(base, f[1]);
    r.video = resolve(base, f[2]);
    r.features = resolve(base, f[3]);
    if (f[4] != "0" && f[4] != "1") throw InputError(path + ":" + std::to_string(lineno) + ": label must be 0 or 1");
    r.label = f[4] == "1" ? 1 : 0;
    r.split = f[5];
    m.records.push_back(std::move(r));
  }
  m.validate();
  return m;
}

void write_manifest(const std::string& path, const Manifest& m) {
  m.validate();
  const fs::path base = fs::absolute(fs::path(path)).lexically_normal().parent_path();
  std::ostringstream os;
  os << "#id\taudio\tvideo\tfeatures\tlabel\tsplit\n";
  for (const ManifestRecord& r : m.records) {
    os << r.id << '\t' << relative_to(base, r.audio) << '\t' << relative_to(base, r.video) << '\t'
       << relative_to(base, r.features) << '\t' << r.label << '\t' << r.split << '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write manifest " + path);
  out << os.str();
  if (!out) throw InputError("write failed: " + path);
}

}  // namespace avwws
