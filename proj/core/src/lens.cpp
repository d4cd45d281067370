#include "uavpheno/lens.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "uavpheno/error.hpp"
#include "uavpheno/parallel.hpp"

namespace uavpheno {

void SmacCamera::validate() const {
  if (!(focal > 0.0)) {
    throw ConfigError("camera focal length must be > 0");
  }
  if (!(pixel_pitch > 0.0)) {
    throw ConfigError("camera pixel_pitch must be > 0");
  }
  if (!(r0 >= 0.0)) {
    throw ConfigError("camera r0 must be >= 0");
  }
  if (sensor_width < 1 || sensor_height < 1) {
    throw ConfigError("camera sensor dimensions must be >= 1");
  }
}

ImagePointMm pixel_to_mm(double row, double col, const SmacCamera& cam) noexcept {
  const double ci = 0.5 * (cam.sensor_height - 1);
  const double cj = 0.5 * (cam.sensor_width - 1);
  return {(col - cj) * cam.pixel_pitch, (ci - row) * cam.pixel_pitch};
}

std::pair<double, double> mm_to_pixel(ImagePointMm p, const SmacCamera& cam) noexcept {
  const double ci = 0.5 * (cam.sensor_height - 1);
  const double cj = 0.5 * (cam.sensor_width - 1);
  return {ci - p.y / cam.pixel_pitch, cj + p.x / cam.pixel_pitch};
}

ImagePointMm reduce_to_principal(ImagePointMm p, const SmacCamera& cam) noexcept {
  return {p.x - cam.xp, p.y - cam.yp};
}

ImagePointMm radial_correction(ImagePointMm reduced, const SmacCamera& cam) noexcept {
  const double r2 = reduced.x * reduced.x + reduced.y * reduced.y;
  const double r4 = r2 * r2;
  const double r6 = r4 * r2;
  const double q2 = cam.r0 * cam.r0;
  const double q4 = q2 * q2;
  const double q6 = q4 * q2;
  const double scale =
      cam.k0 + cam.k1 * (r2 - q2) + cam.k2 * (r4 - q4) + cam.k3 * (r6 - q6);
  return {reduced.x * scale, reduced.y * scale};
}

ImagePointMm decentering_correction(ImagePointMm reduced, const SmacCamera& cam) noexcept {
  const double x = reduced.x;
  const double y = reduced.y;
  const double r2 = x * x + y * y;
  return {cam.p1 * (r2 + 2.0 * x * x) + 2.0 * cam.p2 * x * y,
          2.0 * cam.p1 * x * y + cam.p2 * (r2 + 2.0 * y * y)};
}

namespace {

ImagePointMm total_correction(ImagePointMm reduced, const SmacCamera& cam) noexcept {
  const ImagePointMm rad = radial_correction(reduced, cam);
  const ImagePointMm dec = decentering_correction(reduced, cam);
  return {rad.x + dec.x, rad.y + dec.y};
}

}  // namespace

ImagePointMm correct_point(ImagePointMm measured, const SmacCamera& cam) noexcept {
  const ImagePointMm reduced = reduce_to_principal(measured, cam);
  const ImagePointMm delta = total_correction(reduced, cam);
  return {reduced.x + delta.x, reduced.y + delta.y};
}

ImagePointMm invert_correction(ImagePointMm corrected, const SmacCamera& cam,
                               InversionOptions opts) {
  if (!(opts.tol > 0.0)) {
    throw ConfigError("inversion tolerance must be > 0");
  }
  if (opts.max_iter < 1) {
    throw ConfigError("inversion max_iter must be >= 1");
  }
  ImagePointMm reduced = corrected;
  for (int it = 0; it < opts.max_iter; ++it) {
    const ImagePointMm delta = total_correction(reduced, cam);
    const double rx = reduced.x + delta.x - corrected.x;
    const double ry = reduced.y + delta.y - corrected.y;
    if (!std::isfinite(rx) || !std::isfinite(ry)) {
      break;
    }
    if (std::hypot(rx, ry) < opts.tol) {
      return {reduced.x + cam.xp, reduced.y + cam.yp};
    }
    reduced = {corrected.x - delta.x, corrected.y - delta.y};
  }
  std::ostringstream msg;
  msg << "distortion inversion did not converge at (" << corrected.x << ", " << corrected.y
      << ") mm within " << opts.max_iter << " iterations";
  throw NumericError(msg.str());
}

RasterImage undistort_image(const RasterImage& img, const SmacCamera& cam, int threads) {
  cam.validate();
  if (img.width() != cam.sensor_width || img.height() != cam.sensor_height) {
    std::ostringstream msg;
    msg << "image is " << img.width() << "x" << img.height() << " but camera sensor is "
        << cam.sensor_width << "x" << cam.sensor_height;
    throw InputError(msg.str());
  }
  RasterImage out(img.width(), img.height(), img.channels());
  parallel_for_rows(img.height(), threads, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      for (int j = 0; j < img.width(); ++j) {
        const ImagePointMm p = pixel_to_mm(i, j, cam);
        const ImagePointMm source = invert_correction({p.x - cam.xp, p.y - cam.yp}, cam);
        const auto [row, col] = mm_to_pixel(source, cam);
        for (int c = 0; c < img.channels(); ++c) {
          const double v = sample_bilinear(img, row, col, c, 0.0);
          out.at(i, j, c) = static_cast<std::uint8_t>(std::lround(v));
        }
      }
    }
  });
  return out;
}

SmacCamera parse_camera_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("camera file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw InputError("camera file must hold a JSON object");
  }
  auto number = [&](const char* key, bool required, double fallback) {
    if (!j.contains(key)) {
      if (required) {
        throw InputError(std::string("camera file is missing '") + key + "'");
      }
      return fallback;
    }
    if (!j[key].is_number()) {
      throw InputError(std::string("camera key '") + key + "' must be a number");
    }
    return j[key].get<double>();
  };
  SmacCamera cam;
  cam.xp = number("xp", false, 0.0);
  cam.yp = number("yp", false, 0.0);
  cam.k0 = number("k0", false, 0.0);
  cam.k1 = number("k1", false, 0.0);
  cam.k2 = number("k2", false, 0.0);
  cam.k3 = number("k3", false, 0.0);
  cam.p1 = number("p1", false, 0.0);
  cam.p2 = number("p2", false, 0.0);
  cam.r0 = number("r0", false, 0.0);
  cam.focal = number("focal", true, 0.0);
  cam.pixel_pitch = number("pixel_pitch", true, 0.0);
  cam.sensor_width = static_cast<int>(number("sensor_width", true, 0.0));
  cam.sensor_height = static_cast<int>(number("sensor_height", true, 0.0));
  cam.validate();
  return cam;
}

SmacCamera load_camera_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open camera file '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_camera_json(buffer.str());
}

std::string camera_to_json(const SmacCamera& cam) {
  nlohmann::ordered_json j;
  j["xp"] = cam.xp;
  j["yp"] = cam.yp;
  j["k0"] = cam.k0;
  j["k1"] = cam.k1;
  j["k2"] = cam.k2;
  j["k3"] = cam.k3;
  j["p1"] = cam.p1;
  j["p2"] = cam.p2;
  j["r0"] = cam.r0;
  j["focal"] = cam.focal;
  j["pixel_pitch"] = cam.pixel_pitch;
  j["sensor_width"] = cam.sensor_width;
  j["sensor_height"] = cam.sensor_height;
  return j.dump(2);
}

}  // namespace uavpheno
