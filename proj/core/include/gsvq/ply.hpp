#pragma once

#include <iosfwd>
#include <string>

#include "gsvq/splat.hpp"

namespace gsvq {

// Binary little-endian PLY in the standard 3DGS vertex layout:
//   x y z nx ny nz f_dc_0..2 f_rest_0..44 opacity scale_0..2 rot_0..3
// all float32. Normals are discarded on read and written as zeros.

SplatCloud load_ply(const std::string& path);
SplatCloud load_ply(std::istream& in);

void save_ply(const SplatCloud& cloud, const std::string& path);
void save_ply(const SplatCloud& cloud, std::ostream& out);

// Header text emitted by save_ply for a given vertex count.
std::string ply_header(std::size_t vertex_count);

// Bytes per vertex in the payload (59 params + 3 normals, float32).
inline constexpr std::size_t kPlyVertexBytes = 62 * 4;

} // namespace gsvq
