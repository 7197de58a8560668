#include "souschef/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace souschef::geom {

namespace {

constexpr double kOrthonormalTol = 1e-9;
constexpr double kInverseTol = 1e-9;
constexpr int kMaxIterations = 50;

bool finite(double v) { return std::isfinite(v); }

}  // namespace

const char* to_string(GeometryError::Code c) {
  switch (c) {
    case GeometryError::Code::NonConvergence: return "NonConvergence";
    case GeometryError::Code::SingularIntrinsics: return "SingularIntrinsics";
    case GeometryError::Code::BehindCamera: return "BehindCamera";
    case GeometryError::Code::ParseError: return "ParseError";
    case GeometryError::Code::InvariantViolation: return "InvariantViolation";
  }
  return "?";
}

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }

double Mat3::det() const {
  return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
         at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
         at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
}

std::optional<Mat3> Mat3::inverse() const {
  const double d = det();
  if (!std::isfinite(d) || std::abs(d) < 1e-300) return std::nullopt;
  Mat3 r;
  r.at(0, 0) = (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) / d;
  r.at(0, 1) = (at(0, 2) * at(2, 1) - at(0, 1) * at(2, 2)) / d;
  r.at(0, 2) = (at(0, 1) * at(1, 2) - at(0, 2) * at(1, 1)) / d;
  r.at(1, 0) = (at(1, 2) * at(2, 0) - at(1, 0) * at(2, 2)) / d;
  r.at(1, 1) = (at(0, 0) * at(2, 2) - at(0, 2) * at(2, 0)) / d;
  r.at(1, 2) = (at(0, 2) * at(1, 0) - at(0, 0) * at(1, 2)) / d;
  r.at(2, 0) = (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0)) / d;
  r.at(2, 1) = (at(0, 1) * at(2, 0) - at(0, 0) * at(2, 1)) / d;
  r.at(2, 2) = (at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0)) / d;
  return r;
}

Mat3 Mat3::transpose() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.at(i, j) = at(j, i);
  return r;
}

Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a.at(0, 0) * v.x + a.at(0, 1) * v.y + a.at(0, 2) * v.z,
          a.at(1, 0) * v.x + a.at(1, 1) * v.y + a.at(1, 2) * v.z,
          a.at(2, 0) * v.x + a.at(2, 1) * v.y + a.at(2, 2) * v.z};
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += a.at(i, k) * b.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

Intrinsics Intrinsics::from_pinhole(double fx, double fy, double cx, double cy) {
  Intrinsics k;
  k.k.m = {fx, 0, cx, 0, fy, cy, 0, 0, 1};
  return k;
}

std::optional<GeometryError> Intrinsics::validate() const {
  for (double v : k.m)
    if (!finite(v))
      return GeometryError{GeometryError::Code::InvariantViolation, "K: non-finite entry"};
  if (k.at(2, 0) != 0 || k.at(2, 1) != 0 || k.at(2, 2) != 1)
    return GeometryError{GeometryError::Code::InvariantViolation, "K: last row must be [0 0 1]"};
  if (k.at(0, 0) <= 0 || k.at(1, 1) <= 0)
    return GeometryError{GeometryError::Code::InvariantViolation,
                         "K: focal lengths must be positive"};
  if (!k.inverse())
    return GeometryError{GeometryError::Code::SingularIntrinsics, "K: matrix is singular"};
  return std::nullopt;
}

std::optional<GeometryError> DistortionCoefficients::validate() const {
  for (double v : {k1, k2, k3, p1, p2})
    if (!finite(v))
      return GeometryError{GeometryError::Code::InvariantViolation, "dist: non-finite entry"};
  return std::nullopt;
}

std::optional<GeometryError> Extrinsics::validate() const {
  for (double v : rotation.m)
    if (!finite(v))
      return GeometryError{GeometryError::Code::InvariantViolation, "R: non-finite entry"};
  for (double v : {translation.x, translation.y, translation.z})
    if (!finite(v))
      return GeometryError{GeometryError::Code::InvariantViolation, "t: non-finite entry"};
  const Mat3 rtr = rotation.transpose() * rotation;
  const Mat3 eye = Mat3::identity();
  for (std::size_t i = 0; i < 9; ++i)
    if (std::abs(rtr.m[i] - eye.m[i]) > kOrthonormalTol)
      return GeometryError{GeometryError::Code::InvariantViolation, "R: not orthonormal"};
  if (std::abs(rotation.det() - 1.0) > kOrthonormalTol)
    return GeometryError{GeometryError::Code::InvariantViolation, "R: determinant is not +1"};
  return std::nullopt;
}

std::optional<GeometryError> CameraModel::validate() const {
  if (auto e = intrinsics.validate()) return e;
  if (auto e = distortion.validate()) return e;
  if (auto e = extrinsics.validate()) return e;
  if (!(table_z_camera > 0) || !finite(table_z_camera))
    return GeometryError{GeometryError::Code::InvariantViolation,
                         "table_z_camera: must be positive"};
  return std::nullopt;
}

PixelPoint undistort_pixel(const DistortionCoefficients& d, PixelPoint p, TangentialForm form) {
  const double x = p.x;
  const double y = p.y;
  const double r2 = x * x + y * y;
  const double r4 = r2 * r2;
  const double r6 = r4 * r2;
  const double radial = 1.0 + d.k1 * r2 + d.k2 * r4 + d.k3 * r6;
  const double xu = x * radial + 2.0 * d.p1 * x * y + d.p2 * (r2 + 2.0 * x * x);
  const double cross = (form == TangentialForm::Standard ? d.p2 : d.p1) * 2.0 * x * y;
  const double yu = y * radial + d.p1 * (r2 + 2.0 * y * y) + cross;
  return {xu, yu};
}

namespace {

// Jacobian of the undistortion polynomial at p.
void undistort_jacobian(const DistortionCoefficients& d, PixelPoint p, TangentialForm form,
                        double out[4]) {
  const double x = p.x, y = p.y;
  const double r2 = x * x + y * y;
  const double radial = 1.0 + d.k1 * r2 + d.k2 * r2 * r2 + d.k3 * r2 * r2 * r2;
  const double dradial = d.k1 + 2.0 * d.k2 * r2 + 3.0 * d.k3 * r2 * r2;  // dR/d(r^2)
  out[0] = radial + 2.0 * x * x * dradial + 2.0 * d.p1 * y + 6.0 * d.p2 * x;  // du/dx
  out[1] = 2.0 * x * y * dradial + 2.0 * d.p1 * x + 2.0 * d.p2 * y;           // du/dy
  const double cross = form == TangentialForm::Standard ? d.p2 : d.p1;
  out[2] = 2.0 * x * y * dradial + 2.0 * d.p1 * x + 2.0 * cross * y;          // dv/dx
  out[3] = radial + 2.0 * y * y * dradial + 6.0 * d.p1 * y + 2.0 * cross * x; // dv/dy
}

}  // namespace

Result<PixelPoint, GeometryError> distort_pixel(const DistortionCoefficients& d,
                                                PixelPoint undistorted, TangentialForm form) {
  if (d.is_zero()) return undistorted;

  // Damped Newton on F(p) = undistort(p) - target. Quadratic once close,
  // which keeps even strong-coefficient cases inside the iteration cap.
  PixelPoint p = undistorted;
  auto residual = [&](PixelPoint q, double& rx, double& ry) {
    const PixelPoint u = undistort_pixel(d, q, form);
    rx = undistorted.x - u.x;
    ry = undistorted.y - u.y;
    return std::max(std::abs(rx), std::abs(ry));
  };

  double rx = 0, ry = 0;
  double best = residual(p, rx, ry);
  for (int i = 0; i < kMaxIterations; ++i) {
    if (!finite(best))
      return GeometryError{GeometryError::Code::NonConvergence,
                           "distort_pixel diverged (distortion too strong at this point)"};
    if (best <= 1e-13) return p;

    double j[4];
    undistort_jacobian(d, p, form, j);
    const double det = j[0] * j[3] - j[1] * j[2];
    double step_x, step_y;
    if (finite(det) && std::abs(det) > 1e-14) {
      step_x = (j[3] * rx - j[1] * ry) / det;
      step_y = (j[0] * ry - j[2] * rx) / det;
    } else {
      step_x = rx;  // singular Jacobian: fall back to plain relaxation
      step_y = ry;
    }

    // Halve the step while it fails to reduce the residual.
    PixelPoint next = p;
    double next_rx = rx, next_ry = ry, next_best = best;
    double scale = 1.0;
    for (int backtrack = 0; backtrack < 6; ++backtrack) {
      PixelPoint candidate{p.x + scale * step_x, p.y + scale * step_y};
      double crx, cry;
      const double cbest = residual(candidate, crx, cry);
      if (finite(cbest) && cbest < best) {
        next = candidate;
        next_rx = crx;
        next_ry = cry;
        next_best = cbest;
        break;
      }
      scale /= 2.0;
    }
    if (next_best >= best) break;  // no progress possible
    p = next;
    rx = next_rx;
    ry = next_ry;
    best = next_best;
  }

  if (finite(best) && best <= kInverseTol) return p;
  std::ostringstream msg;
  msg << "distort_pixel did not converge after " << kMaxIterations << " iterations (residual "
      << best << ")";
  return GeometryError{GeometryError::Code::NonConvergence, msg.str()};
}

Result<CameraPoint, GeometryError> pixel_to_camera(const Intrinsics& k, PixelPoint p, double z_c) {
  const auto inv = k.k.inverse();
  if (!inv)
    return GeometryError{GeometryError::Code::SingularIntrinsics,
                         "intrinsic matrix is not invertible"};
  const Vec3 n = *inv * Vec3{p.x, p.y, 1.0};
  return CameraPoint{n.x * z_c, n.y * z_c, n.z * z_c};
}

WorldPoint camera_to_world(const Extrinsics& e, const CameraPoint& c) {
  // [R|t; 0 1]^-1 = [R^T | -R^T t; 0 1]
  const Vec3 w = e.rotation.transpose() * (Vec3{c.x, c.y, c.z} - e.translation);
  return {w.x, w.y, w.z};
}

CameraPoint world_to_camera(const Extrinsics& e, const WorldPoint& w) {
  const Vec3 c = e.rotation * Vec3{w.x, w.y, w.z} + e.translation;
  return {c.x, c.y, c.z};
}

Result<Projection, GeometryError> world_to_pixel(const CameraModel& m, const WorldPoint& w) {
  const CameraPoint c = world_to_camera(m.extrinsics, w);
  if (!(c.z > 0)) {
    std::ostringstream msg;
    msg << "point is behind the camera (z_c = " << c.z << ")";
    return GeometryError{GeometryError::Code::BehindCamera, msg.str()};
  }
  const Vec3 h = m.intrinsics.k * Vec3{c.x, c.y, c.z};
  return Projection{{h.x / c.z, h.y / c.z}, c.z};
}

Result<WorldPoint, GeometryError> pixel_to_world(const CameraModel& m, PixelPoint raw,
                                                 TangentialForm form) {
  const PixelPoint undistorted = undistort_pixel(m.distortion, raw, form);
  const auto cam = pixel_to_camera(m.intrinsics, undistorted, m.table_z_camera);
  if (!cam.ok()) return cam.error();
  return camera_to_world(m.extrinsics, cam.value());
}

namespace {

GeometryError parse_error(const std::string& msg) {
  return {GeometryError::Code::ParseError, msg};
}

Result<std::vector<double>, GeometryError> reals(const nlohmann::json& j, const char* key,
                                                 std::size_t count) {
  if (!j.contains(key)) return parse_error(std::string("missing key \"") + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != count) {
    std::ostringstream msg;
    msg << "key \"" << key << "\" must be an array of " << count << " reals";
    return parse_error(msg.str());
  }
  std::vector<double> out;
  out.reserve(count);
  for (const auto& e : v) {
    if (!e.is_number()) return parse_error(std::string("key \"") + key + "\" has a non-number");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

Result<CameraModel, GeometryError> parse_calibration(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    return parse_error("calibration document is not a JSON object");

  static const std::array<const char*, 5> allowed = {"K", "dist", "R", "t", "table_z_camera"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) return parse_error("unknown key \"" + it.key() + "\"");
  }

  const auto kvals = reals(j, "K", 9);
  if (!kvals.ok()) return kvals.error();
  const auto dvals = reals(j, "dist", 5);
  if (!dvals.ok()) return dvals.error();
  const auto rvals = reals(j, "R", 9);
  if (!rvals.ok()) return rvals.error();
  const auto tvals = reals(j, "t", 3);
  if (!tvals.ok()) return tvals.error();
  if (!j.contains("table_z_camera") || !j.at("table_z_camera").is_number())
    return parse_error("missing or non-numeric key \"table_z_camera\"");

  CameraModel m;
  std::copy(kvals->begin(), kvals->end(), m.intrinsics.k.m.begin());
  // File order is [k1 k2 p1 p2 k3].
  m.distortion.k1 = (*dvals)[0];
  m.distortion.k2 = (*dvals)[1];
  m.distortion.p1 = (*dvals)[2];
  m.distortion.p2 = (*dvals)[3];
  m.distortion.k3 = (*dvals)[4];
  std::copy(rvals->begin(), rvals->end(), m.extrinsics.rotation.m.begin());
  m.extrinsics.translation = {(*tvals)[0], (*tvals)[1], (*tvals)[2]};
  m.table_z_camera = j.at("table_z_camera").get<double>();

  if (auto e = m.validate()) return *e;
  return m;
}

Result<CameraModel, GeometryError> load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return parse_error("cannot open calibration file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_calibration(buf.str());
}

std::string calibration_to_json(const CameraModel& m) {
  nlohmann::json j;
  j["K"] = m.intrinsics.k.m;
  j["dist"] = {m.distortion.k1, m.distortion.k2, m.distortion.p1, m.distortion.p2,
               m.distortion.k3};
  j["R"] = m.extrinsics.rotation.m;
  j["t"] = {m.extrinsics.translation.x, m.extrinsics.translation.y, m.extrinsics.translation.z};
  j["table_z_camera"] = m.table_z_camera;
  return j.dump(2) + "\n";
}

}  // namespace souschef::geom
