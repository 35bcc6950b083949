#pragma once

#include <map>
#include <string>

#include "dicg/params.hpp"

namespace dicg {

// Versioned binary parameter container. Layout (all integers and doubles
// little-endian):
//   magic "DICGCKPT" | u32 version | u64 entry count
//   per entry: u32 name length | name bytes | u32 rows | u32 cols
//              | rows*cols f64 row-major values
// Round-trips are exact.
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ParameterStore& store, const std::string& path);
std::map<std::string, Matrix> load_checkpoint(const std::string& path);

}  // namespace dicg
