#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>

#include "souschef/result.hpp"

namespace souschef::geom {

struct GeometryError {
  enum class Code {
    NonConvergence,
    SingularIntrinsics,
    BehindCamera,
    ParseError,
    InvariantViolation,
  };
  Code code;
  std::string message;
};

const char* to_string(GeometryError::Code c);

struct Vec3 {
  double x = 0, y = 0, z = 0;
  bool operator==(const Vec3&) const = default;
};

Vec3 operator+(const Vec3& a, const Vec3& b);
Vec3 operator-(const Vec3& a, const Vec3& b);
Vec3 operator*(double s, const Vec3& v);

// Row-major 3x3 matrix. Small enough that hand-rolled algebra beats pulling
// in a linear-algebra dependency for one module.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }
  double at(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
  double& at(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }
  double det() const;
  std::optional<Mat3> inverse() const;
  Mat3 transpose() const;
  bool operator==(const Mat3&) const = default;
};

Vec3 operator*(const Mat3& a, const Vec3& v);
Mat3 operator*(const Mat3& a, const Mat3& b);

struct PixelPoint {
  double x = 0, y = 0;
  bool operator==(const PixelPoint&) const = default;
};

struct CameraPoint {
  double x = 0, y = 0, z = 0;
  bool operator==(const CameraPoint&) const = default;
};

struct WorldPoint {
  double x = 0, y = 0, z = 0;
  bool operator==(const WorldPoint&) const = default;
};

// Axis-aligned pixel rectangle; x_min < x_max and y_min < y_max.
struct PixelBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  PixelPoint center() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }
  bool operator==(const PixelBox&) const = default;
};

// 3x3 camera matrix mapping camera coordinates to pixel coordinates.
// Valid instances have [0 0 1] as the last row, positive focal lengths,
// and are invertible.
struct Intrinsics {
  Mat3 k;

  static Intrinsics from_pinhole(double fx, double fy, double cx, double cy);
  double fx() const { return k.at(0, 0); }
  double fy() const { return k.at(1, 1); }
  double cx() const { return k.at(0, 2); }
  double cy() const { return k.at(1, 2); }
  std::optional<GeometryError> validate() const;
  bool operator==(const Intrinsics&) const = default;
};

// Radial (k1,k2,k3) and tangential (p1,p2) lens coefficients.
struct DistortionCoefficients {
  double k1 = 0, k2 = 0, k3 = 0;
  double p1 = 0, p2 = 0;
  bool is_zero() const { return k1 == 0 && k2 == 0 && k3 == 0 && p1 == 0 && p2 == 0; }
  std::optional<GeometryError> validate() const;
  bool operator==(const DistortionCoefficients&) const = default;
};

// World -> camera rigid transform: c = R*w + t. R must be a proper rotation
// (orthonormal, det +1) within 1e-9.
struct Extrinsics {
  Mat3 rotation;
  Vec3 translation;

  std::optional<GeometryError> validate() const;
  bool operator==(const Extrinsics&) const = default;
};

struct CameraModel {
  Intrinsics intrinsics;
  DistortionCoefficients distortion;
  Extrinsics extrinsics;
  // z of the table plane in camera coordinates; every tabletop object sits
  // at this depth.
  double table_z_camera = 1.0;

  std::optional<GeometryError> validate() const;
  bool operator==(const CameraModel&) const = default;
};

// The y-equation of the printed polynomial repeats the 2*p1*x*y cross term;
// the standard model uses 2*p2*x*y there (otherwise p2 never affects y).
// Standard is the default; AsPrinted reproduces the other form verbatim.
enum class TangentialForm { Standard, AsPrinted };

// Distorted pixel -> undistorted pixel, by direct evaluation of the
// polynomial in raw pixel space. Total function.
PixelPoint undistort_pixel(const DistortionCoefficients& d, PixelPoint distorted,
                           TangentialForm form = TangentialForm::Standard);

// Numerical inverse of undistort_pixel via fixed-point iteration (at most
// 50 steps). Fails with NonConvergence if the residual stays above 1e-9.
Result<PixelPoint, GeometryError> distort_pixel(const DistortionCoefficients& d,
                                                PixelPoint undistorted,
                                                TangentialForm form = TangentialForm::Standard);

// Undistorted pixel -> camera-frame point at depth z_c: scale K^-1 * [x y 1]
// by z_c.
Result<CameraPoint, GeometryError> pixel_to_camera(const Intrinsics& k, PixelPoint undistorted,
                                                   double z_c);

// Camera frame -> world frame (inverse of the extrinsic transform).
WorldPoint camera_to_world(const Extrinsics& e, const CameraPoint& c);

// World frame -> camera frame.
CameraPoint world_to_camera(const Extrinsics& e, const WorldPoint& w);

struct Projection {
  PixelPoint pixel;  // undistorted
  double z_c = 0;
};

// World point -> undistorted pixel plus camera depth. Fails with
// BehindCamera when z_c <= 0. Lens distortion is applied separately with
// distort_pixel when a raw camera is being simulated.
Result<Projection, GeometryError> world_to_pixel(const CameraModel& m, const WorldPoint& w);

// Raw (distorted) pixel -> world point on the table plane. Chains
// undistort_pixel, pixel_to_camera at table depth, camera_to_world — in that
// order, with undistortion in raw pixel space before K^-1.
Result<WorldPoint, GeometryError> pixel_to_world(const CameraModel& m, PixelPoint raw,
                                                 TangentialForm form = TangentialForm::Standard);

// Calibration document: JSON object with exactly the keys
//   K              9 reals, row-major
//   dist           [k1 k2 p1 p2 k3]
//   R              9 reals, row-major
//   t              3 reals
//   table_z_camera 1 real
// Unknown keys are rejected; invariant violations name the offending field.
Result<CameraModel, GeometryError> parse_calibration(const std::string& json_text);
Result<CameraModel, GeometryError> load_calibration(const std::filesystem::path& path);
// Serializes a model back into the calibration document format.
std::string calibration_to_json(const CameraModel& m);

}  // namespace souschef::geom
