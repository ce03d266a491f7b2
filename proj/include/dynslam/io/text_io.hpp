#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "dynslam/data/dataset.hpp"
#include "dynslam/data/estimate.hpp"

namespace dynslam {

/// Malformed input file. `line` is 1-based, 0 when not tied to a line.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Shortest decimal that round-trips to the same double.
std::string formatDouble(double v);

// Dataset text format, one record per line, space separated:
//   #dynosam v1
//   META frame_interval <s>
//   ODOM <k> <tx> <ty> <tz> <qx> <qy> <qz> <qw>      measured relative pose k-1 -> k
//   GTPOSE <k> <7 pose fields>
//   GTOBJ <k> <object_id> <7 pose fields>
//   OBS <k> <point_id> <object_id> <x> <y> <z>      camera frame
//   GTPT <k> <point_id> <x> <y> <z>                 reference frame
// Canonical order: header, META, then per frame ODOM, GTPOSE, GTOBJ, OBS, GTPT.
void writeDataset(const Dataset& dataset, std::ostream& os);
void writeDataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset readDataset(std::istream& is);
Dataset readDataset(const std::filesystem::path& path);

// Estimate text format:
//   #dynosam-estimate v1
//   META mode <dynamic|static|slam-mot>
//   META motion <per-step|smoothed|constant>
//   POSE <k> <7 pose fields>
//   STATIC <point_id> <x> <y> <z>
//   DYNAMIC <k> <point_id> <object_id> <inlier 0|1> <x> <y> <z>
//   MOTION <object_id> <k> <7 pose fields>        reference-frame change k-1 -> k
void writeEstimate(const Estimate& estimate, std::ostream& os);
void writeEstimate(const Estimate& estimate, const std::filesystem::path& path);
Estimate readEstimate(std::istream& is);
Estimate readEstimate(const std::filesystem::path& path);

}  // namespace dynslam
