#include "globreg/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "globreg/error.hpp"

namespace globreg {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + what);
}

double parse_number(const std::string& tok, std::size_t line_no) {
  double value = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) parse_fail(line_no, "malformed number '" + tok + "'");
  if (!std::isfinite(value)) parse_fail(line_no, "non-finite coordinate '" + tok + "'");
  return value;
}

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

PointCloud parse_xyz(std::istream& in) {
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(strip_comment(line));
    if (tokens.empty()) continue;
    if (tokens.size() < 3) parse_fail(line_no, "expected 'x y z'");
    cloud.points.emplace_back(parse_number(tokens[0], line_no), parse_number(tokens[1], line_no),
                              parse_number(tokens[2], line_no));
  }
  return cloud;
}

PointCloud parse_ply(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") parse_fail(std::max<std::size_t>(line_no, 1), "missing 'ply' magic");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
  };
  std::vector<Element> elements;
  bool ascii = false;
  bool header_done = false;
  while (next_line()) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "end_header") {
      header_done = true;
      break;
    }
    if (tokens[0] == "format") {
      if (tokens.size() < 2) parse_fail(line_no, "malformed format line");
      if (tokens[1] != "ascii") throw Error(ErrorKind::kParse, "binary PLY is not supported (format " + tokens[1] + ")");
      ascii = true;
    } else if (tokens[0] == "element") {
      if (tokens.size() != 3) parse_fail(line_no, "malformed element line");
      Element e;
      e.name = tokens[1];
      try {
        e.count = std::stoull(tokens[2]);
      } catch (const std::exception&) {
        parse_fail(line_no, "malformed element count");
      }
      elements.push_back(e);
    } else if (tokens[0] == "property") {
      if (elements.empty()) parse_fail(line_no, "property before element");
      if (tokens.size() < 3) parse_fail(line_no, "malformed property line");
      elements.back().properties.push_back(tokens.back());
      if (elements.back().name == "vertex" && tokens[1] == "list") parse_fail(line_no, "list property on vertex");
    } else if (tokens[0] != "comment" && tokens[0] != "obj_info") {
      parse_fail(line_no, "unknown header keyword '" + tokens[0] + "'");
    }
  }
  if (!header_done) parse_fail(line_no, "unterminated PLY header");
  if (!ascii) parse_fail(line_no, "PLY header lacks a format line");

  PointCloud cloud;
  for (const auto& e : elements) {
    if (e.name != "vertex") {
      // only vertices are read; everything after them is ignored
      if (cloud.empty()) {
        for (std::size_t i = 0; i < e.count; ++i) {
          if (!next_line()) parse_fail(line_no, "truncated element '" + e.name + "'");
        }
        continue;
      }
      break;
    }
    const auto find = [&](const char* name) -> long {
      const auto it = std::find(e.properties.begin(), e.properties.end(), name);
      return it == e.properties.end() ? -1 : static_cast<long>(it - e.properties.begin());
    };
    const long ix = find("x"), iy = find("y"), iz = find("z");
    if (ix < 0 || iy < 0 || iz < 0) parse_fail(line_no, "vertex element lacks x, y or z");
    cloud.points.reserve(e.count);
    for (std::size_t i = 0; i < e.count; ++i) {
      if (!next_line()) parse_fail(line_no + 1, "unexpected end of vertex data");
      const auto tokens = split_ws(line);
      if (tokens.size() < e.properties.size()) parse_fail(line_no, "too few vertex values");
      cloud.points.emplace_back(parse_number(tokens[ix], line_no), parse_number(tokens[iy], line_no),
                                parse_number(tokens[iz], line_no));
    }
    break;
  }
  return cloud;
}

}  // namespace

CloudFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ply" ? CloudFormat::kPlyAscii : CloudFormat::kXyz;
}

PointCloud parse_cloud(std::istream& in, CloudFormat format) {
  return format == CloudFormat::kPlyAscii ? parse_ply(in) : parse_xyz(in);
}

PointCloud read_cloud(const std::filesystem::path& path, CloudFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return parse_cloud(in, format);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

PointCloud read_cloud(const std::filesystem::path& path) { return read_cloud(path, format_from_path(path)); }

void write_xyz(std::ostream& os, const PointCloud& cloud) {
  os << std::setprecision(17);
  for (const auto& p : cloud.points) os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

void write_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  write_xyz(out, cloud);
}

std::string pose_to_text(const Pose& pose) {
  std::ostringstream os;
  os << std::setprecision(17);
  const Matrix4 m = pose.matrix();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) os << m(r, c) << (c == 3 ? '\n' : ' ');
  }
  return os.str();
}

Pose pose_from_text(const std::string& text) {
  const auto tokens = split_ws(text);
  if (tokens.size() != 16) throw Error(ErrorKind::kParse, "pose text needs 16 numbers, got " + std::to_string(tokens.size()));
  Matrix4 m;
  for (int i = 0; i < 16; ++i) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tokens[i].data(), tokens[i].data() + tokens[i].size(), v);
    if (ec != std::errc() || ptr != tokens[i].data() + tokens[i].size() || !std::isfinite(v)) {
      throw Error(ErrorKind::kParse, "malformed pose entry '" + tokens[i] + "'");
    }
    m(i / 4, i % 4) = v;
  }
  return Pose::from_matrix(m);
}

nlohmann::json pose_to_json(const Pose& pose) {
  nlohmann::json rotation = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    rotation.push_back({pose.rotation()(r, 0), pose.rotation()(r, 1), pose.rotation()(r, 2)});
  }
  const Point3& t = pose.translation();
  return {{"R", rotation}, {"t", {t.x(), t.y(), t.z()}}};
}

Pose pose_from_json(const nlohmann::json& j) {
  try {
    Matrix3 rotation;
    const auto& rows = j.at("R");
    const auto& t = j.at("t");
    if (rows.size() != 3 || t.size() != 3) throw Error(ErrorKind::kParse, "pose JSON needs a 3x3 R and a 3-vector t");
    for (int r = 0; r < 3; ++r) {
      if (rows[r].size() != 3) throw Error(ErrorKind::kParse, "pose JSON needs a 3x3 R");
      for (int c = 0; c < 3; ++c) rotation(r, c) = rows[r][c].get<double>();
    }
    return Pose(rotation, Point3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed pose JSON: ") + e.what());
  }
}

void write_descriptors(std::ostream& os, const DescriptorSet& descriptors) {
  os << std::setprecision(9);
  for (std::size_t r = 0; r < descriptors.size(); ++r) {
    os << descriptors.indices[r];
    for (Eigen::Index c = 0; c < descriptors.features.cols(); ++c) {
      os << ' ' << descriptors.features(static_cast<Eigen::Index>(r), c);
    }
    os << '\n';
  }
}

void write_correspondences(std::ostream& os, const CorrespondenceSet& corrs) {
  os << std::setprecision(9);
  for (const auto& c : corrs) os << c.src << ' ' << c.tgt << ' ' << c.d1 << ' ' << c.d2 << ' ' << c.ratio << '\n';
}

}  // namespace globreg
