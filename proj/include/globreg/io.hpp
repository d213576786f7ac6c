#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "globreg/faster_pfh.hpp"
#include "globreg/geometry.hpp"
#include "globreg/matching.hpp"

namespace globreg {

enum class CloudFormat { kXyz, kPlyAscii };

/// Picks the format from the file extension (.ply -> PLY, anything else -> xyz).
CloudFormat format_from_path(const std::filesystem::path& path);

/// xyz: "x y z" per line (extra columns ignored), '#' starts a comment.
/// PLY: ASCII only; x, y, z float/double vertex properties, others ignored.
/// Errors carry the 1-based line number of the offending line.
PointCloud parse_cloud(std::istream& in, CloudFormat format);
PointCloud read_cloud(const std::filesystem::path& path, CloudFormat format);
PointCloud read_cloud(const std::filesystem::path& path);

void write_xyz(std::ostream& os, const PointCloud& cloud);
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);

/// 16 numbers, row-major homogeneous matrix, four per line.
std::string pose_to_text(const Pose& pose);
Pose pose_from_text(const std::string& text);

/// {"R": [[...],[...],[...]], "t": [...]}
nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);

/// One line per descriptor: owner index then the 3H values, 9 significant digits.
void write_descriptors(std::ostream& os, const DescriptorSet& descriptors);

/// "i j d1 d2 ratio" per line.
void write_correspondences(std::ostream& os, const CorrespondenceSet& corrs);

}  // namespace globreg
