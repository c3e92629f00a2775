#include "gft/harness/attention_export.hpp"

#include <cstdio>
#include <fstream>

#include "gft/errors.hpp"

namespace gft::harness {

PatchAttention patch_attention(const std::vector<numcore::Tensor>& head_maps, const backbone::TokenLayout& layout,
                               const std::vector<double>& centers, AttentionDirection direction) {
  if (head_maps.empty()) throw ArgumentError("patch_attention: no attention heads");
  const std::size_t r = layout.rows();
  if (centers.size() != 3 * layout.patches) throw DimensionError("patch_attention: need one center per patch");
  for (const auto& m : head_maps) {
    if (m.rows() != r || m.cols() != r) throw DimensionError("patch_attention: map does not match the layout");
  }
  PatchAttention out;
  out.direction = direction;
  out.centers = centers;
  out.weights.assign(layout.patches, 0.0);
  const double inv_h = 1.0 / static_cast<double>(head_maps.size());
  for (const auto& m : head_maps) {
    const auto v = m.values();
    for (std::size_t p = 0; p < layout.patches; ++p) {
      const std::size_t t = layout.patch_begin() + p;
      out.weights[p] += (direction == AttentionDirection::cls_query ? v[t] : v[t * r]) * inv_h;
    }
  }
  if (direction == AttentionDirection::cls_query) {
    double kept = 0.0;
    for (double w : out.weights) kept += w;
    out.excluded_mass = 1.0 - kept;
  }
  return out;
}

PatchAttention extract_attention(const model::GftModel& model, const pointops::PointCloud& cloud, int layer,
                                 AttentionDirection direction) {
  const int depth = static_cast<int>(model.config().depth);
  if (layer < 1 || layer > depth) {
    throw ArgumentError("attention layer " + std::to_string(layer) + " outside [1, " + std::to_string(depth) + "]");
  }
  model::ForwardOptions fo;
  fo.attention_layers = {layer};
  const auto r = model.forward(cloud, fo);
  return patch_attention(r.attention.at(layer), r.layout, r.geometry.centers, direction);
}

void write_attention_csv(const PatchAttention& attention, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "center_x,center_y,center_z,weight\n";
  char buf[128];
  for (std::size_t p = 0; p < attention.weights.size(); ++p) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.17g\n", attention.centers[3 * p], attention.centers[3 * p + 1],
                  attention.centers[3 * p + 2], attention.weights[p]);
    out << buf;
  }
  if (attention.direction == AttentionDirection::cls_query) {
    std::snprintf(buf, sizeof buf, "# excluded_mass=%.17g\n", attention.excluded_mass);
    out << buf;
  } else {
    out << "# direction=patch_query\n";
  }
}

}  // namespace gft::harness
