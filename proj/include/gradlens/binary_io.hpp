#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>

namespace gradlens {

void write_f32le(std::ostream& out, std::span<const float> values);
// Returns false if the stream ran out before all values were read.
bool read_f32le(std::istream& in, std::span<float> values);

}  // namespace gradlens
