#pragma once

#include <string>
#include <vector>

#include "seqprobe/tensor.hpp"

namespace seqprobe {

// Flat binary parameter container. Layout: magic "SPRB1", u32 record count,
// then per parameter: u32 name length, name bytes, u32 rank, u32 dims[rank],
// float32 values[numel]. All integers and floats little-endian.
void save_checkpoint(const std::string& path, const std::vector<const Param*>& params);

std::vector<Param> load_checkpoint(const std::string& path);

// Fills existing parameters by name; every parameter must be present in the
// file with a matching shape.
void load_checkpoint_into(const std::string& path, const std::vector<Param*>& params);

}  // namespace seqprobe
