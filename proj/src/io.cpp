#include "rvegen/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace rvegen::io {

namespace {

using nlohmann::json;

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::Io, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return in;
}

std::vector<double> numbers_in(std::string line) {
  if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  for (char& c : line)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream ss(line);
  std::vector<double> out;
  double v;
  while (ss >> v) out.push_back(v);
  if (!ss.eof()) throw Error(ErrorCode::Io, "malformed number in line: " + line);
  return out;
}

}  // namespace

json diagram_to_json(const SeedSet& seeds, const LaguerreDiagram& diagram,
                     const TargetMasses& targets) {
  json j;
  j["lattice"] = vec_json(seeds.lattice().lengths());
  json seed_list = json::array();
  for (const auto& p : seeds.positions()) seed_list.push_back(vec_json(p));
  j["seeds"] = std::move(seed_list);
  j["weights"] = std::vector<double>(seeds.weights().begin(), seeds.weights().end());
  j["targets"] = std::vector<double>(targets.values().begin(), targets.values().end());
  json cells = json::array();
  for (int i = 0; i < diagram.size(); ++i) {
    const auto& cell = diagram.cells[i];
    json c;
    c["seed"] = i;
    c["volume"] = diagram.volumes[i];
    c["centroid"] = vec_json(diagram.centroids[i]);
    json verts = json::array();
    for (const auto& v : cell.vertices()) verts.push_back(vec_json(v));
    c["vertices"] = std::move(verts);
    json facets = json::array();
    for (const auto& f : cell.facets()) {
      facets.push_back({{"vertices", f.vertices},
                        {"neighbor", f.neighbor.seed},
                        {"shift", f.neighbor.shift},
                        {"normal", vec_json(f.plane.normal)},
                        {"offset", f.plane.offset}});
    }
    c["facets"] = std::move(facets);
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j;
}

DiagramFile diagram_from_json(const json& j) {
  try {
    const Vec3 len = vec_from(j.at("lattice"));
    DiagramFile out{Lattice(len[0], len[1], len[2]), {}, {}, {}, {}};
    for (const auto& p : j.at("seeds")) out.seeds.push_back(vec_from(p));
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto m = j.at("targets").get<std::vector<double>>();
    out.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    out.targets = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    for (const auto& c : j.at("cells")) {
      std::vector<Vec3> verts;
      for (const auto& v : c.at("vertices")) verts.push_back(vec_from(v));
      std::vector<Facet> facets;
      for (const auto& f : c.at("facets")) {
        Facet facet;
        facet.vertices = f.at("vertices").get<std::vector<int>>();
        for (int v : facet.vertices)
          if (v < 0 || v >= static_cast<int>(verts.size()))
            throw Error(ErrorCode::Io, "facet references a missing vertex");
        facet.neighbor.seed = f.at("neighbor").get<int>();
        facet.neighbor.shift = f.at("shift").get<Shift>();
        facet.plane = {vec_from(f.at("normal")), f.at("offset").get<double>()};
        facets.push_back(std::move(facet));
      }
      out.cells.emplace_back(std::move(verts), std::move(facets));
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed diagram JSON: ") + e.what());
  }
}

void write_stats_csv(std::ostream& out, const LaguerreDiagram& diagram, const TargetMasses& targets) {
  for (std::size_t c = 0; c < kStatsColumns.size(); ++c)
    out << (c ? "," : "") << kStatsColumns[c];
  out << '\n' << std::setprecision(17);
  for (int i = 0; i < diagram.size(); ++i) {
    const double v = diagram.volumes[i];
    const Vec3& g = diagram.centroids[i];
    out << i << ',' << v << ',' << targets[i] << ',' << 100.0 * std::abs(v - targets[i]) / targets[i]
        << ',' << g[0] << ',' << g[1] << ',' << g[2] << ',' << diagram.cells[i].facets().size()
        << '\n';
  }
}

void write_obj(std::ostream& out, const LaguerreDiagram& diagram) {
  out << std::setprecision(17);
  std::size_t base = 1;
  for (int i = 0; i < diagram.size(); ++i) {
    const auto& cell = diagram.cells[i];
    out << "o cell_" << i << '\n';
    for (const auto& v : cell.vertices()) out << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    for (const auto& f : cell.facets()) {
      out << 'f';
      for (int v : f.vertices) out << ' ' << base + v;
      out << '\n';
    }
    base += cell.vertices().size();
  }
}

std::vector<Vec3> read_points(const std::string& path) {
  auto in = open_input(path);
  std::vector<Vec3> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto row = numbers_in(line);
    if (row.empty()) continue;
    if (row.size() != 3) throw Error(ErrorCode::Io, path + ": expected 3 coordinates per row");
    out.emplace_back(row[0], row[1], row[2]);
  }
  return out;
}

std::vector<double> read_values(const std::string& path) {
  auto in = open_input(path);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto row = numbers_in(line);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

json read_json(const std::string& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << contents;
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

}  // namespace rvegen::io
