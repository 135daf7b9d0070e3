/*
 * Copyright 2026 The rankforge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Textual network checkpoints.
//
//   rankforge-ckpt v1
//   arch CE4.L                      (or "arch custom")
//   meta <key> <value>              (zero or more)
//   layers <n>
//   layer <in> <out> <activation> <batchnorm 0|1>     (n lines)
//   tensor <layer> <weight|bias|gamma|beta|mean|var> <count>
//   <count values, %.17g, space separated>
//   ...
//   end
//
// Every double is printed with 17 significant digits, so a save/load cycle
// reproduces the network bit for bit.

#ifndef RANKFORGE_CHECKPOINT_H_
#define RANKFORGE_CHECKPOINT_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "rankforge/network.h"

namespace rankforge {

inline constexpr const char* kCheckpointMagic = "rankforge-ckpt v1";

struct Checkpoint {
  Network network;
  std::map<std::string, std::string> meta;
};

void write_checkpoint(std::ostream& out, const Network& net,
                      const std::map<std::string, std::string>& meta = {});
// Throws ParseError on any malformed or inconsistent content.
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     const std::map<std::string, std::string>& meta = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

// %.17g rendering shared by every text writer in the toolkit.
std::string format_double(double v);

}  // namespace rankforge

#endif  // RANKFORGE_CHECKPOINT_H_
