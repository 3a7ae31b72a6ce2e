// Copyright 2026 The NSNN Authors
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

#ifndef NSNN_MODEL_IO_H_
#define NSNN_MODEL_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "nsnn/network.h"

namespace nsnn {

inline constexpr int kModelFormatVersion = 1;

// Extra metadata stored next to the parameters; ignored on load.
struct ModelProvenance {
  std::uint64_t seed = 0;
  std::string config_hash;
};

// JSON document with every double written in shortest round-trip form.
std::string serialize_model(const Network& net, const ModelProvenance* provenance = nullptr);
// Throws VersionError for another format_version and FormatError for
// malformed or truncated documents.
Network parse_model(const std::string& text);

void save_model(const Network& net, const std::filesystem::path& path,
                const ModelProvenance* provenance = nullptr);
Network load_model(const std::filesystem::path& path);

}  // namespace nsnn

#endif  // NSNN_MODEL_IO_H_
