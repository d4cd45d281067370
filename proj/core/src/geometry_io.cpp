#include "uavpheno/geometry_io.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "uavpheno/csv.hpp"
#include "uavpheno/error.hpp"

namespace uavpheno {

std::vector<Correspondence2D> parse_correspondences(const std::string& text) {
  const csv::Table t = csv::parse(text);
  csv::require_header(t, {"x1", "y1", "x2", "y2"}, "correspondence file");
  std::vector<Correspondence2D> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    Correspondence2D c;
    c.a = {csv::to_double(row[0], "x1"), csv::to_double(row[1], "y1")};
    c.b = {csv::to_double(row[2], "x2"), csv::to_double(row[3], "y2")};
    if (!std::isfinite(c.a.x) || !std::isfinite(c.a.y) || !std::isfinite(c.b.x) ||
        !std::isfinite(c.b.y)) {
      throw InputError("correspondence file: non-finite coordinate");
    }
    out.push_back(c);
  }
  return out;
}

std::vector<Correspondence2D> read_correspondences(const std::filesystem::path& path) {
  return parse_correspondences(csv::read_text(path));
}

std::string format_correspondences(const std::vector<Correspondence2D>& matches) {
  std::string out = "x1,y1,x2,y2\n";
  for (const auto& c : matches) {
    out += csv::format(c.a.x) + "," + csv::format(c.a.y) + "," + csv::format(c.b.x) + "," +
           csv::format(c.b.y) + "\n";
  }
  return out;
}

std::vector<EopRecord> parse_eops(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("EOP file is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) {
    throw InputError("EOP file must hold a JSON array");
  }
  std::vector<EopRecord> out;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("image") || !item.contains("position") ||
        !item.contains("rotation")) {
      throw InputError("EOP entries need 'image', 'position' and 'rotation'");
    }
    const auto& pos = item["position"];
    const auto& rot = item["rotation"];
    if (!item["image"].is_string() || !pos.is_array() || pos.size() != 3 || !rot.is_array() ||
        rot.size() != 9) {
      throw InputError("EOP entry has malformed image/position/rotation");
    }
    EopRecord rec;
    rec.image = item["image"].get<std::string>();
    try {
      for (int k = 0; k < 3; ++k) {
        rec.eo.position(k) = pos[static_cast<std::size_t>(k)].get<double>();
      }
      for (int k = 0; k < 9; ++k) {
        rec.eo.rotation(k / 3, k % 3) = rot[static_cast<std::size_t>(k)].get<double>();
      }
    } catch (const nlohmann::json::exception&) {
      throw InputError("EOP entry '" + rec.image + "' has non-numeric values");
    }
    rec.eo.validate();
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<EopRecord> read_eops(const std::filesystem::path& path) {
  return parse_eops(csv::read_text(path));
}

std::string format_eops(const std::vector<EopRecord>& eops) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& rec : eops) {
    nlohmann::ordered_json item;
    item["image"] = rec.image;
    item["position"] = {rec.eo.position.x(), rec.eo.position.y(), rec.eo.position.z()};
    auto rot = nlohmann::ordered_json::array();
    for (int k = 0; k < 9; ++k) {
      rot.push_back(rec.eo.rotation(k / 3, k % 3));
    }
    item["rotation"] = rot;
    arr.push_back(item);
  }
  return arr.dump(2) + "\n";
}

std::vector<GcpPair> parse_gcps(const std::string& text) {
  const csv::Table t = csv::parse(text);
  csv::require_header(t, {"Xlocal", "Ylocal", "Zlocal", "Xmap", "Ymap", "Zmap"}, "GCP file");
  std::vector<GcpPair> out;
  for (const auto& row : t.rows) {
    GcpPair g;
    for (int k = 0; k < 3; ++k) {
      g.local(k) = csv::to_double(row[static_cast<std::size_t>(k)], "GCP local coordinate");
      g.mapping(k) = csv::to_double(row[static_cast<std::size_t>(k + 3)], "GCP map coordinate");
    }
    out.push_back(g);
  }
  return out;
}

std::vector<GcpPair> read_gcps(const std::filesystem::path& path) {
  return parse_gcps(csv::read_text(path));
}

std::vector<Eigen::Vector3d> parse_point_cloud(const std::string& text) {
  const csv::Table t = csv::parse(text);
  csv::require_header(t, {"X", "Y", "Z"}, "point cloud");
  std::vector<Eigen::Vector3d> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    out.emplace_back(csv::to_double(row[0], "X"), csv::to_double(row[1], "Y"),
                     csv::to_double(row[2], "Z"));
  }
  return out;
}

std::vector<Eigen::Vector3d> read_point_cloud(const std::filesystem::path& path) {
  return parse_point_cloud(csv::read_text(path));
}

std::string format_point_cloud(const std::vector<Eigen::Vector3d>& cloud) {
  std::string out = "X,Y,Z\n";
  for (const auto& p : cloud) {
    out += csv::format(p.x()) + "," + csv::format(p.y()) + "," + csv::format(p.z()) + "\n";
  }
  return out;
}

DemGrid parse_dem_csv(const std::string& text) {
  const csv::Table t = csv::parse(text, false);
  if (t.rows.size() < 5) {
    throw InputError("DEM file needs 4 header lines and at least one data row");
  }
  auto header_value = [&](std::size_t line, const char* key) {
    const auto& row = t.rows[line];
    if (row.size() == 2 && row[0] == key) {
      return csv::to_double(row[1], key);
    }
    if (row.size() == 1) {
      return csv::to_double(row[0], key);
    }
    throw InputError(std::string("DEM header line ") + std::to_string(line + 1) +
                     " should be '" + key + ",<value>'");
  };
  DemGrid dem;
  dem.origin_x = header_value(0, "origin_x");
  dem.origin_y = header_value(1, "origin_y");
  dem.cell = header_value(2, "cell");
  const double nx = header_value(3, "nx");
  dem.nx = static_cast<int>(nx);
  if (dem.nx < 1 || static_cast<double>(dem.nx) != nx) {
    throw InputError("DEM nx must be a positive integer");
  }
  dem.ny = static_cast<int>(t.rows.size() - 4);
  for (std::size_t r = 4; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != static_cast<std::size_t>(dem.nx)) {
      throw InputError("DEM row " + std::to_string(r - 3) + " has " +
                       std::to_string(t.rows[r].size()) + " values, expected " +
                       std::to_string(dem.nx));
    }
    for (const auto& field : t.rows[r]) {
      dem.z.push_back(csv::to_double(field, "DEM elevation"));
    }
  }
  dem.validate();
  return dem;
}

DemGrid read_dem_csv(const std::filesystem::path& path) {
  return parse_dem_csv(csv::read_text(path));
}

std::string format_dem_csv(const DemGrid& dem) {
  std::string out;
  out += "origin_x," + csv::format(dem.origin_x) + "\n";
  out += "origin_y," + csv::format(dem.origin_y) + "\n";
  out += "cell," + csv::format(dem.cell) + "\n";
  out += "nx," + std::to_string(dem.nx) + "\n";
  for (int iy = 0; iy < dem.ny; ++iy) {
    for (int ix = 0; ix < dem.nx; ++ix) {
      out += (ix == 0 ? "" : ",") + csv::format(dem.at(ix, iy));
    }
    out += "\n";
  }
  return out;
}

std::string similarity2d_to_json(const Similarity2D& s) {
  nlohmann::ordered_json j;
  j["scale"] = s.scale;
  j["kappa"] = s.kappa;
  j["t"] = {s.t.x, s.t.y};
  return j.dump(2) + "\n";
}

std::string similarity3d_to_json(const Similarity3D& s) {
  nlohmann::ordered_json j;
  j["scale"] = s.scale;
  auto rot = nlohmann::ordered_json::array();
  for (int k = 0; k < 9; ++k) {
    rot.push_back(s.rotation(k / 3, k % 3));
  }
  j["rotation"] = rot;
  j["translation"] = {s.translation.x(), s.translation.y(), s.translation.z()};
  return j.dump(2) + "\n";
}

}  // namespace uavpheno
