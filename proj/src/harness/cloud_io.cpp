#include "gft/harness/cloud_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "gft/errors.hpp"

namespace gft::harness {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

pointops::PointCloud load_cloud(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open cloud file " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty cloud file " + path.string(), 1);
  const auto head = split_ws(line);
  std::size_t n = 0;
  int has_labels = 0;
  if (head.size() != 4 || head[0] != "XYZL" || head[1] != "1" || !parse_number(head[2], n) ||
      !parse_number(head[3], has_labels) || (has_labels != 0 && has_labels != 1)) {
    throw ParseError("bad XYZL header in " + path.string(), 1);
  }
  pointops::PointCloud cloud;
  cloud.xyz.reserve(3 * n);
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::size_t want = has_labels ? 4 : 3;
    if (tok.size() != want) {
      throw ParseError("expected " + std::to_string(want) + " fields, got " + std::to_string(tok.size()), line_no);
    }
    for (std::size_t d = 0; d < 3; ++d) {
      double v = 0.0;
      if (!parse_number(tok[d], v) || !std::isfinite(v)) throw ParseError("bad coordinate '" + tok[d] + "'", line_no);
      cloud.xyz.push_back(v);
    }
    if (has_labels) {
      int l = 0;
      if (!parse_number(tok[3], l) || l < 0) throw ParseError("bad label '" + tok[3] + "'", line_no);
      cloud.point_labels.push_back(l);
    }
    ++rows;
  }
  if (rows != n) {
    throw FormatError("cloud " + path.string() + ": header declares " + std::to_string(n) + " points, found " +
                      std::to_string(rows));
  }
  if (n == 0) throw FormatError("cloud " + path.string() + " has no points");
  return cloud;
}

void save_cloud(const pointops::PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write cloud file " + path.string());
  os.imbue(std::locale::classic());
  const bool labels = !cloud.point_labels.empty();
  os << "XYZL 1 " << cloud.size() << ' ' << (labels ? 1 : 0) << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    os << cloud.xyz[3 * i] << ' ' << cloud.xyz[3 * i + 1] << ' ' << cloud.xyz[3 * i + 2];
    if (labels) os << ' ' << cloud.point_labels[i];
    os << '\n';
  }
}

std::string to_string(Split split) { return split == Split::train ? "train" : "test"; }

Split parse_split(const std::string& text) {
  if (text == "train") return Split::train;
  if (text == "test") return Split::test;
  throw ArgumentError("unknown split '" + text + "'");
}

bool DatasetManifest::has_labels() const {
  return !entries.empty() && entries.front().label.has_value();
}

int DatasetManifest::num_classes() const {
  int c = 0;
  for (const auto& e : entries)
    if (e.label) c = std::max(c, *e.label + 1);
  return c;
}

std::vector<ManifestEntry> DatasetManifest::split(Split s) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.split == s) out.push_back(e);
  return out;
}

std::filesystem::path DatasetManifest::resolve(const ManifestEntry& e) const {
  std::filesystem::path p(e.path);
  return p.is_absolute() ? p : root / p;
}

DatasetManifest load_manifest(const std::filesystem::path& csv) {
  std::ifstream is(csv);
  if (!is) throw FormatError("cannot open manifest " + csv.string());
  DatasetManifest m;
  m.root = csv.parent_path();
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty manifest", 1);
  const auto header = split_csv(line);
  bool labelled = false;
  if (header == std::vector<std::string>{"path", "label", "split"}) {
    labelled = true;
  } else if (header != std::vector<std::string>{"path", "split"}) {
    throw ParseError("manifest header must be 'path,label,split' or 'path,split'", 1);
  }
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) throw ParseError("wrong field count", line_no);
    ManifestEntry e;
    e.path = f[0];
    if (labelled) {
      int l = 0;
      if (!parse_number(f[1], l) || l < 0) throw ParseError("bad label '" + f[1] + "'", line_no);
      e.label = l;
    }
    try {
      e.split = parse_split(f.back());
    } catch (const ArgumentError&) {
      throw ParseError("unknown split '" + f.back() + "'", line_no);
    }
    m.entries.push_back(std::move(e));
  }
  if (labelled) {
    std::vector<bool> seen(static_cast<std::size_t>(m.num_classes()), false);
    for (const auto& e : m.entries) seen[static_cast<std::size_t>(*e.label)] = true;
    for (std::size_t c = 0; c < seen.size(); ++c)
      if (!seen[c]) throw FormatError("manifest labels are not dense: class " + std::to_string(c) + " is missing");
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& csv) {
  std::ofstream os(csv);
  if (!os) throw std::runtime_error("cannot write manifest " + csv.string());
  const bool labelled = manifest.has_labels();
  os << (labelled ? "path,label,split\n" : "path,split\n");
  for (const auto& e : manifest.entries) {
    os << e.path << ',';
    if (labelled) os << *e.label << ',';
    os << to_string(e.split) << '\n';
  }
}

std::vector<pointops::PointCloud> load_clouds(const DatasetManifest& manifest,
                                              const std::vector<ManifestEntry>& entries) {
  std::vector<pointops::PointCloud> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    auto cloud = load_cloud(manifest.resolve(e));
    cloud.object_label = e.label;
    out.push_back(std::move(cloud));
  }
  return out;
}

}  // namespace gft::harness
