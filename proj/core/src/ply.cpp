#include "gsvq/ply.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "gsvq/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "PLY codec assumes a little-endian host");

namespace gsvq {

namespace {

constexpr int kPropertyCount = 62;

std::array<std::string, kPropertyCount> property_names() {
    std::array<std::string, kPropertyCount> names;
    int i = 0;
    for (const char* n : {"x", "y", "z", "nx", "ny", "nz"}) names[i++] = n;
    for (int c = 0; c < 3; ++c) names[i++] = "f_dc_" + std::to_string(c);
    for (int c = 0; c < 45; ++c) names[i++] = "f_rest_" + std::to_string(c);
    names[i++] = "opacity";
    for (int c = 0; c < 3; ++c) names[i++] = "scale_" + std::to_string(c);
    for (int c = 0; c < 4; ++c) names[i++] = "rot_" + std::to_string(c);
    return names;
}

[[noreturn]] void header_error(const std::string& what) {
    throw FormatError(FormatError::Kind::BadHeader, 0, "PLY header: " + what);
}

} // namespace

std::string ply_header(std::size_t vertex_count) {
    std::ostringstream out;
    out << "ply\n";
    out << "format binary_little_endian 1.0\n";
    out << "element vertex " << vertex_count << "\n";
    for (const auto& name : property_names()) out << "property float " << name << "\n";
    out << "end_header\n";
    return out.str();
}

SplatCloud load_ply(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "ply") {
        throw FormatError(FormatError::Kind::BadMagic, 0, "not a PLY file (missing 'ply' magic)");
    }

    const auto expected = property_names();
    std::size_t vertex_count = 0;
    bool have_format = false;
    bool have_vertex_element = false;
    int next_property = 0;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line == "end_header") break;
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "comment" || keyword.empty()) continue;
        if (keyword == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt == "ascii") header_error("ASCII PLY is not supported, expected binary_little_endian");
            if (fmt != "binary_little_endian") header_error("unsupported format '" + fmt + "'");
            have_format = true;
        } else if (keyword == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            if (name != "vertex") header_error("unexpected element '" + name + "'");
            if (have_vertex_element) header_error("duplicate vertex element");
            have_vertex_element = true;
            vertex_count = count;
        } else if (keyword == "property") {
            if (!have_vertex_element) header_error("property before element");
            std::string type, name;
            ls >> type >> name;
            if (next_property >= kPropertyCount) header_error("unexpected property '" + name + "'");
            if (name != expected[next_property]) {
                header_error("expected property '" + expected[next_property] + "', found '" + name + "'");
            }
            if (type != "float") {
                header_error("property '" + name + "' has type '" + type + "', expected 'float'");
            }
            ++next_property;
        } else {
            header_error("unexpected keyword '" + keyword + "'");
        }
    }
    if (line != "end_header") header_error("missing end_header");
    if (!have_format) header_error("missing format line");
    if (!have_vertex_element) header_error("missing vertex element");
    if (next_property < kPropertyCount) {
        header_error("missing property '" + expected[next_property] + "'");
    }

    SplatCloud cloud;
    cloud.splats.resize(vertex_count);
    std::vector<float> row(kPropertyCount);
    for (std::size_t i = 0; i < vertex_count; ++i) {
        in.read(reinterpret_cast<char*>(row.data()), kPlyVertexBytes);
        if (static_cast<std::size_t>(in.gcount()) != kPlyVertexBytes) {
            throw FormatError(FormatError::Kind::Truncated, i * kPlyVertexBytes,
                              "truncated PLY payload at vertex " + std::to_string(i));
        }
        GaussianSplat& s = cloud.splats[i];
        std::memcpy(s.position.data(), row.data(), 3 * sizeof(float));
        // row[3..5] are normals, discarded
        std::memcpy(s.color_dc.data(), row.data() + 6, 3 * sizeof(float));
        std::memcpy(s.sh_rest.data(), row.data() + 9, 45 * sizeof(float));
        s.opacity_raw = row[54];
        std::memcpy(s.scale_raw.data(), row.data() + 55, 3 * sizeof(float));
        std::memcpy(s.rotation.data(), row.data() + 58, 4 * sizeof(float));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError(FormatError::Kind::BadValue, vertex_count * kPlyVertexBytes,
                          "trailing data after PLY payload");
    }
    return cloud;
}

SplatCloud load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return load_ply(in);
}

void save_ply(const SplatCloud& cloud, std::ostream& out) {
    out << ply_header(cloud.size());
    std::vector<float> row(kPropertyCount, 0.0f);
    for (const GaussianSplat& s : cloud.splats) {
        std::memcpy(row.data(), s.position.data(), 3 * sizeof(float));
        row[3] = row[4] = row[5] = 0.0f; // normals, unused by 3DGS
        std::memcpy(row.data() + 6, s.color_dc.data(), 3 * sizeof(float));
        std::memcpy(row.data() + 9, s.sh_rest.data(), 45 * sizeof(float));
        row[54] = s.opacity_raw;
        std::memcpy(row.data() + 55, s.scale_raw.data(), 3 * sizeof(float));
        std::memcpy(row.data() + 58, s.rotation.data(), 4 * sizeof(float));
        out.write(reinterpret_cast<const char*>(row.data()), kPlyVertexBytes);
    }
    if (!out) throw IoError("PLY write failed");
}

void save_ply(const SplatCloud& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    save_ply(cloud, out);
}

} // namespace gsvq
