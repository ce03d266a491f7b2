#include "dynslam/io/text_io.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>
#include <system_error>
#include <vector>

namespace dynslam {

std::string formatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr std::string_view kDatasetHeader = "#dynosam v1";
constexpr std::string_view kEstimateHeader = "#dynosam-estimate v1";

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

class LineParser {
 public:
  LineParser(std::vector<std::string_view> tokens, int line) : tokens_(std::move(tokens)), line_(line) {}

  std::string_view tag() const { return tokens_.front(); }

  void expectCount(std::size_t n) const {
    if (tokens_.size() != n)
      throw DataError(std::string(tag()) + " expects " + std::to_string(n - 1) + " fields, got " +
                          std::to_string(tokens_.size() - 1),
                      line_);
  }

  std::string_view word(std::size_t i) const { return tokens_.at(i); }

  int integer(std::size_t i) const {
    const auto t = tokens_.at(i);
    int v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      throw DataError("bad integer '" + std::string(t) + "'", line_);
    return v;
  }

  double real(std::size_t i) const {
    const auto t = tokens_.at(i);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      throw DataError("bad number '" + std::string(t) + "'", line_);
    return v;
  }

  Vec3 vec3(std::size_t i) const { return {real(i), real(i + 1), real(i + 2)}; }

  Pose pose(std::size_t i) const {
    const Eigen::Quaterniond q(real(i + 6), real(i + 3), real(i + 4), real(i + 5));
    if (!(q.norm() > 1e-9)) throw DataError("degenerate quaternion", line_);
    return {q, vec3(i)};
  }

  int line() const { return line_; }

 private:
  std::vector<std::string_view> tokens_;
  int line_;
};

std::string poseFields(const Pose& p) {
  const auto& q = p.quaternion();
  const auto& t = p.translation();
  std::string s;
  for (double v : {t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w()}) {
    s += ' ';
    s += formatDouble(v);
  }
  return s;
}

std::string vecFields(const Vec3& v) {
  return " " + formatDouble(v.x()) + " " + formatDouble(v.y()) + " " + formatDouble(v.z());
}

template <typename Fn>
void forEachRecord(std::istream& is, std::string_view header, Fn&& fn) {
  std::string line;
  int n = 0;
  bool saw_header = false;
  while (std::getline(is, line)) {
    ++n;
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    if (!saw_header) {
      std::string_view trimmed = line;
      while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' ')) trimmed.remove_suffix(1);
      if (trimmed != header) throw DataError("missing '" + std::string(header) + "' header", n);
      saw_header = true;
      continue;
    }
    if (tokens.front().front() == '#') continue;
    fn(LineParser(std::move(tokens), n));
  }
  if (!saw_header) throw DataError("missing '" + std::string(header) + "' header");
}

std::ofstream openForWrite(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

std::ifstream openForRead(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read " + path.string());
  return is;
}

}  // namespace

void writeDataset(const Dataset& ds, std::ostream& os) {
  const auto& gt = ds.ground_truth;
  os << kDatasetHeader << '\n';
  os << "META frame_interval " << formatDouble(ds.frame_interval) << '\n';
  for (const Frame& f : ds.frames) {
    const int k = f.index;
    if (f.odometry) os << "ODOM " << k << poseFields(*f.odometry) << '\n';
    if (const auto it = gt.robot_poses.find(k); it != gt.robot_poses.end())
      os << "GTPOSE " << k << poseFields(it->second) << '\n';
    if (const auto it = gt.object_poses.find(k); it != gt.object_poses.end())
      for (const auto& [obj, L] : it->second) os << "GTOBJ " << k << ' ' << obj << poseFields(L) << '\n';
    for (const auto& o : f.observations)
      os << "OBS " << k << ' ' << o.point_id << ' ' << o.object_id << vecFields(o.position) << '\n';
    for (auto it = gt.points.lower_bound({k, std::numeric_limits<int>::min()});
         it != gt.points.end() && it->first.first == k; ++it)
      os << "GTPT " << k << ' ' << it->first.second << vecFields(it->second) << '\n';
  }
}

void writeDataset(const Dataset& dataset, const std::filesystem::path& path) {
  auto os = openForWrite(path);
  writeDataset(dataset, os);
}

Dataset readDataset(std::istream& is) {
  Dataset ds;
  std::map<int, Frame> frames;
  int max_frame = -1;
  auto frameAt = [&](int k, int line) -> Frame& {
    if (k < 0) throw DataError("negative frame index", line);
    max_frame = std::max(max_frame, k);
    Frame& f = frames[k];
    f.index = k;
    return f;
  };

  forEachRecord(is, kDatasetHeader, [&](const LineParser& p) {
    const auto tag = p.tag();
    if (tag == "META") {
      p.expectCount(3);
      if (p.word(1) != "frame_interval") throw DataError("unknown META key '" + std::string(p.word(1)) + "'", p.line());
      ds.frame_interval = p.real(2);
      if (!(ds.frame_interval > 0.0)) throw DataError("frame_interval must be > 0", p.line());
    } else if (tag == "ODOM") {
      p.expectCount(9);
      Frame& f = frameAt(p.integer(1), p.line());
      if (f.odometry) throw DataError("duplicate ODOM for frame " + std::to_string(f.index), p.line());
      f.odometry = p.pose(2);
    } else if (tag == "GTPOSE") {
      p.expectCount(9);
      const int k = p.integer(1);
      frameAt(k, p.line());
      if (!ds.ground_truth.robot_poses.emplace(k, p.pose(2)).second)
        throw DataError("duplicate GTPOSE for frame " + std::to_string(k), p.line());
    } else if (tag == "GTOBJ") {
      p.expectCount(10);
      const int k = p.integer(1);
      frameAt(k, p.line());
      if (!ds.ground_truth.object_poses[k].emplace(p.integer(2), p.pose(3)).second)
        throw DataError("duplicate GTOBJ", p.line());
    } else if (tag == "OBS") {
      p.expectCount(7);
      const int k = p.integer(1);
      TrackedPoint obs{k, p.integer(2), p.integer(3), p.vec3(4)};
      if (obs.object_id < 0) throw DataError("negative object id", p.line());
      frameAt(k, p.line()).observations.push_back(obs);
    } else if (tag == "GTPT") {
      p.expectCount(6);
      const int k = p.integer(1);
      frameAt(k, p.line());
      if (!ds.ground_truth.points.emplace(std::pair{k, p.integer(2)}, p.vec3(3)).second)
        throw DataError("duplicate GTPT", p.line());
    } else {
      throw DataError("unknown record tag '" + std::string(tag) + "'", p.line());
    }
  });

  for (int k = 0; k <= max_frame; ++k) {
    Frame& f = frames[k];
    f.index = k;
    ds.frames.push_back(std::move(f));
  }
  return ds;
}

Dataset readDataset(const std::filesystem::path& path) {
  auto is = openForRead(path);
  return readDataset(is);
}

void writeEstimate(const Estimate& e, std::ostream& os) {
  os << kEstimateHeader << '\n';
  os << "META mode " << toString(e.mode) << '\n';
  os << "META motion " << toString(e.motion_mode) << '\n';
  for (const auto& [k, x] : e.robot_poses) os << "POSE " << k << poseFields(x) << '\n';
  for (const auto& [id, p] : e.static_points) os << "STATIC " << id << vecFields(p) << '\n';
  for (const auto& [key, p] : e.dynamic_points)
    os << "DYNAMIC " << key.first << ' ' << key.second << ' ' << p.object_id << ' ' << (p.inlier ? 1 : 0)
       << vecFields(p.position) << '\n';
  for (const auto& [obj, seq] : e.motions)
    for (const auto& [k, H] : seq) os << "MOTION " << obj << ' ' << k << poseFields(H) << '\n';
}

void writeEstimate(const Estimate& estimate, const std::filesystem::path& path) {
  auto os = openForWrite(path);
  writeEstimate(estimate, os);
}

Estimate readEstimate(std::istream& is) {
  Estimate e;
  forEachRecord(is, kEstimateHeader, [&](const LineParser& p) {
    const auto tag = p.tag();
    if (tag == "META") {
      p.expectCount(3);
      if (p.word(1) == "mode") {
        const auto m = parseEstimationMode(p.word(2));
        if (!m) throw DataError("unknown mode '" + std::string(p.word(2)) + "'", p.line());
        e.mode = *m;
      } else if (p.word(1) == "motion") {
        const auto m = parseMotionMode(p.word(2));
        if (!m) throw DataError("unknown motion mode '" + std::string(p.word(2)) + "'", p.line());
        e.motion_mode = *m;
      } else {
        throw DataError("unknown META key '" + std::string(p.word(1)) + "'", p.line());
      }
    } else if (tag == "POSE") {
      p.expectCount(9);
      e.robot_poses[p.integer(1)] = p.pose(2);
    } else if (tag == "STATIC") {
      p.expectCount(5);
      e.static_points[p.integer(1)] = p.vec3(2);
    } else if (tag == "DYNAMIC") {
      p.expectCount(8);
      const int inlier = p.integer(4);
      if (inlier != 0 && inlier != 1) throw DataError("inlier flag must be 0 or 1", p.line());
      e.dynamic_points[{p.integer(1), p.integer(2)}] = {p.integer(3), p.vec3(5), inlier == 1};
    } else if (tag == "MOTION") {
      p.expectCount(10);
      e.motions[p.integer(1)][p.integer(2)] = p.pose(3);
    } else {
      throw DataError("unknown record tag '" + std::string(tag) + "'", p.line());
    }
  });
  return e;
}

Estimate readEstimate(const std::filesystem::path& path) {
  auto is = openForRead(path);
  return readEstimate(is);
}

}  // namespace dynslam
