#include "gsvq/camera.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "gsvq/errors.hpp"

namespace gsvq {

void validate_camera(const Camera& cam) {
    if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) throw std::invalid_argument("camera focal lengths must be > 0");
    if (cam.width < 1 || cam.height < 1) throw std::invalid_argument("camera image size must be >= 1");
    if (!(cam.near > 0.0)) throw std::invalid_argument("camera near plane must be > 0");
}

Mat3 view_rotation(const Camera& cam) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = cam.view[static_cast<std::size_t>(i) * 4 + j];
    return r;
}

Vec3 camera_center(const Camera& cam) {
    const Mat3 r = view_rotation(cam);
    const Vec3 t{cam.view[3], cam.view[7], cam.view[11]};
    const Vec3 c = transpose(r) * t;
    return {-c[0], -c[1], -c[2]};
}

Vec3 to_camera_space(const Camera& cam, const Vec3& p) {
    Vec3 out{};
    for (int i = 0; i < 3; ++i) {
        const double* row = cam.view.data() + static_cast<std::size_t>(i) * 4;
        out[i] = row[0] * p[0] + row[1] * p[1] + row[2] * p[2] + row[3];
    }
    return out;
}

std::array<double, 16> look_at_view(const Vec3& eye, const Vec3& target, const Vec3& up) {
    const Vec3 z = normalized({target[0] - eye[0], target[1] - eye[1], target[2] - eye[2]});
    const Vec3 x = normalized(cross(z, up));
    const Vec3 y = cross(z, x);

    std::array<double, 16> v{};
    const Vec3 rows[3] = {x, y, z};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) v[static_cast<std::size_t>(i) * 4 + j] = rows[i][j];
        v[static_cast<std::size_t>(i) * 4 + 3] = -dot(rows[i], eye);
    }
    v[15] = 1.0;
    return v;
}

namespace {

Camera camera_from_json(const nlohmann::json& j) {
    Camera cam;
    try {
        const auto& view = j.at("view");
        if (!view.is_array() || view.size() != 16) {
            throw FormatError(FormatError::Kind::BadValue, 0,
                              "camera 'view' must be an array of 16 numbers");
        }
        for (std::size_t i = 0; i < 16; ++i) cam.view[i] = view[i].get<double>();
        cam.fx = j.at("fx").get<double>();
        cam.fy = j.at("fy").get<double>();
        cam.cx = j.at("cx").get<double>();
        cam.cy = j.at("cy").get<double>();
        cam.width = j.at("width").get<int>();
        cam.height = j.at("height").get<int>();
        cam.near = j.value("near", 0.1);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(FormatError::Kind::BadValue, 0,
                          std::string("camera file field error: ") + e.what());
    }
    try {
        validate_camera(cam);
    } catch (const std::invalid_argument& e) {
        throw FormatError(FormatError::Kind::BadValue, 0, e.what());
    }
    return cam;
}

nlohmann::json camera_to_json(const Camera& cam) {
    nlohmann::json j;
    j["view"] = cam.view;
    j["fx"] = cam.fx;
    j["fy"] = cam.fy;
    j["cx"] = cam.cx;
    j["cy"] = cam.cy;
    j["width"] = cam.width;
    j["height"] = cam.height;
    j["near"] = cam.near;
    return j;
}

} // namespace

std::vector<Camera> load_cameras(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open camera file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(FormatError::Kind::BadValue, 0,
                          "camera file '" + path + "' is not valid JSON: " + e.what());
    }
    std::vector<Camera> cams;
    if (j.is_array()) {
        for (const auto& item : j) cams.push_back(camera_from_json(item));
    } else {
        cams.push_back(camera_from_json(j));
    }
    if (cams.empty()) {
        throw FormatError(FormatError::Kind::BadValue, 0,
                          "camera file '" + path + "' contains no cameras");
    }
    return cams;
}

void save_cameras(const std::vector<Camera>& cams, const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const Camera& cam : cams) j.push_back(camera_to_json(cam));
    std::ofstream out(path);
    if (!out) throw IoError("cannot open camera file '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("camera file write failed");
}

} // namespace gsvq
