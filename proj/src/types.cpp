#include "xnocs/types.hpp"

#include <cmath>

#include "xnocs/error.hpp"

namespace xnocs {

void cleanup_mesh(Mesh& mesh) {
  const int n = static_cast<int>(mesh.vertices.size());
  if (!mesh.vertex_colors.empty() && mesh.vertex_colors.size() != mesh.vertices.size())
    throw InputError("mesh has " + std::to_string(mesh.vertex_colors.size()) +
                     " vertex colors for " + std::to_string(n) + " vertices");
  std::vector<std::array<int, 3>> kept;
  kept.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    for (int i : t)
      if (i < 0 || i >= n)
        throw InputError("triangle index " + std::to_string(i) + " out of range (vertex count " +
                         std::to_string(n) + ")");
    const double area =
        triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    if (area > 1e-12) kept.push_back(t);
  }
  mesh.triangles = std::move(kept);
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InputError("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InputError("camera image size must be positive");
  if (!is_rotation(rotation, 1e-9))
    throw InputError("camera rotation is not orthonormal with determinant +1");
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, int width,
                       int height, double focal) {
  const Vec3 forward = normalized(target - eye);
  Vec3 up_hint = up;
  if (std::abs(dot(forward, normalized(up_hint))) > 1.0 - 1e-6) up_hint = {1.0, 0.0, 0.0};
  // Image rows run downward, so the camera y axis is -up.
  const Vec3 x_cam = normalized(cross(-up_hint, forward));
  const Vec3 y_cam = cross(forward, x_cam);

  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = focal > 0.0 ? focal : 1.2 * std::max(width, height);
  cam.cx = 0.5 * (width - 1);
  cam.cy = 0.5 * (height - 1);
  cam.rotation = Mat3::from_rows(x_cam, y_cam, forward);
  cam.translation = -(cam.rotation * eye);
  return cam;
}

}  // namespace xnocs
