#pragma once

#include <string>

#include "clir/nn.hpp"

namespace clir {

// Model snapshot format, magic "CLIRCKPT v1":
//   line 1: magic
//   line 2: model config as one JSON object
//   then per parameter, in lexicographic name order:
//     header line `name ndim dim1 dim2 ...`
//     followed by the values as little-endian IEEE-754 binary64, row major
// Round-trips bit exactly.
void save_checkpoint(const std::string& path, const Model& model);
Model load_checkpoint(const std::string& path);

}  // namespace clir
