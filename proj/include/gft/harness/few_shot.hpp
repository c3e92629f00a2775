#pragma once

#include <cstdint>
#include <vector>

#include "gft/harness/cloud_io.hpp"

namespace gft::harness {

// N-way K-shot episode. Entry labels are remapped to [0, n_way) in the order
// of `class_ids`.
struct FewShotTask {
  std::size_t n_way = 0;
  std::size_t k_shot = 0;
  std::vector<int> class_ids;
  std::vector<ManifestEntry> train;  // exactly n_way * k_shot
  std::vector<ManifestEntry> test;   // up to queries_per_class per class
};

// Classes uniformly without replacement; K train instances per class without
// replacement from the train split; queries from the test split. Throws
// ArgumentError when there are too few classes or instances.
FewShotTask sample_few_shot(const DatasetManifest& manifest, std::size_t n_way, std::size_t k_shot,
                            std::uint64_t seed, std::size_t queries_per_class = 20);

}  // namespace gft::harness
