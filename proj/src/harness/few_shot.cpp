#include "gft/harness/few_shot.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "gft/errors.hpp"

namespace gft::harness {

FewShotTask sample_few_shot(const DatasetManifest& manifest, std::size_t n_way, std::size_t k_shot,
                            std::uint64_t seed, std::size_t queries_per_class) {
  if (!manifest.has_labels()) throw ArgumentError("few-shot sampling needs a labelled manifest");
  if (n_way == 0 || k_shot == 0) throw ArgumentError("few-shot: n_way and k_shot must be positive");
  std::map<int, std::vector<ManifestEntry>> train_by_class, test_by_class;
  for (const auto& e : manifest.entries) {
    (e.split == Split::train ? train_by_class : test_by_class)[*e.label].push_back(e);
  }
  std::vector<int> classes;
  for (const auto& [c, v] : train_by_class) classes.push_back(c);
  if (classes.size() < n_way) {
    throw ArgumentError("few-shot: " + std::to_string(n_way) + "-way task but only " +
                        std::to_string(classes.size()) + " classes");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(classes.begin(), classes.end(), rng);
  classes.resize(n_way);

  FewShotTask task;
  task.n_way = n_way;
  task.k_shot = k_shot;
  task.class_ids = classes;
  for (std::size_t w = 0; w < n_way; ++w) {
    auto pool = train_by_class[classes[w]];
    if (pool.size() < k_shot) {
      throw ArgumentError("few-shot: class " + std::to_string(classes[w]) + " has " + std::to_string(pool.size()) +
                          " training instances, need " + std::to_string(k_shot));
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t i = 0; i < k_shot; ++i) {
      auto e = pool[i];
      e.label = static_cast<int>(w);
      task.train.push_back(std::move(e));
    }
    auto queries = test_by_class[classes[w]];
    std::shuffle(queries.begin(), queries.end(), rng);
    for (std::size_t i = 0; i < std::min(queries_per_class, queries.size()); ++i) {
      auto e = queries[i];
      e.label = static_cast<int>(w);
      task.test.push_back(std::move(e));
    }
  }
  return task;
}

}  // namespace gft::harness
