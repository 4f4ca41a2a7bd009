#pragma once

#include "tsk/data.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tsk {

// Gaussian-mixture classification data. Each class owns a few latent
// clusters; features are a random linear image of the latent point plus
// noise, with per-feature scales and offsets so that standardization
// matters. With replicated_bands, feature j copies latent coordinate
// j % latent_dim (neighbouring pixels of a multispectral image).
struct MixtureSpec {
  std::string name;
  std::vector<int> class_counts;
  int dim = 2;
  int latent_dim = 2;
  int clusters_per_class = 1;
  double separation = 3.0;
  double cluster_std = 1.0;
  double feature_noise = 0.1;
  bool replicated_bands = false;
};

Encoded generate_mixture(const MixtureSpec& spec, std::uint64_t seed);

// Named presets shaped after common benchmark datasets:
//   blobs3     300 x 4, 3 well separated classes
//   vehicle    846 x 18, 4 classes
//   biodeg     1055 x 41, 2 imbalanced classes
//   yeast      1484 x 8, 10 imbalanced classes
//   satellite  6435 x 36, 6 imbalanced classes, correlated band features
std::vector<std::string> synthetic_names();
MixtureSpec synthetic_spec(const std::string& name);
Dataset synthetic_dataset(const std::string& name, std::uint64_t seed = 2020);

// CSV text with a header, features first and a "label" column last.
std::string to_csv(const Encoded& data);

}  // namespace tsk
