#include "tsk/synthetic.hpp"

#include "tsk/error.hpp"
#include "tsk/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

namespace tsk {

Encoded generate_mixture(const MixtureSpec& spec, std::uint64_t seed) {
  const int C = int(spec.class_counts.size());
  if (C < 2 || spec.dim < 1 || spec.latent_dim < 1 || spec.clusters_per_class < 1) {
    throw Error(ErrorKind::InvalidArgument, "invalid mixture specification '" + spec.name + "'");
  }
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int L = spec.latent_dim;
  const int D = spec.dim;
  Matrix centers(C * spec.clusters_per_class, L);
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = spec.separation * gauss(rng);

  Matrix mixing = Matrix::Zero(L, D);
  if (spec.replicated_bands) {
    for (int j = 0; j < D; ++j) mixing(j % L, j) = 1.0;
  } else {
    for (Eigen::Index i = 0; i < mixing.size(); ++i) mixing.data()[i] = gauss(rng) / std::sqrt(double(L));
  }
  Vector scale(D), offset(D);
  for (int j = 0; j < D; ++j) {
    scale(j) = std::pow(10.0, 2.0 * unif(rng) - 0.5);
    offset(j) = 10.0 * gauss(rng);
  }

  const int N = std::accumulate(spec.class_counts.begin(), spec.class_counts.end(), 0);
  Encoded out;
  out.X.resize(N, D);
  out.y.resize(std::size_t(N));
  Vector latent(L);
  int row = 0;
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < spec.class_counts[std::size_t(c)]; ++i, ++row) {
      const int cluster = c * spec.clusters_per_class + int(unif(rng) * spec.clusters_per_class) % spec.clusters_per_class;
      for (int l = 0; l < L; ++l) latent(l) = centers(cluster, l) + spec.cluster_std * gauss(rng);
      Eigen::RowVectorXd x = latent.transpose() * mixing;
      for (int j = 0; j < D; ++j) out.X(row, j) = (x(j) + spec.feature_noise * gauss(rng)) * scale(j) + offset(j);
      out.y[std::size_t(row)] = c;
    }
  }
  for (int j = 0; j < D; ++j) out.dictionaries.feature_names.push_back(fmt::format("f{}", j));
  // zero padded so that lexicographic order equals numeric order
  for (int c = 0; c < C; ++c) out.dictionaries.labels.push_back(fmt::format("class{:02d}", c));
  return out;
}

std::vector<std::string> synthetic_names() { return {"blobs3", "vehicle", "biodeg", "yeast", "satellite"}; }

MixtureSpec synthetic_spec(const std::string& name) {
  if (name == "blobs3") return {name, {100, 100, 100}, 4, 4, 1, 6.0, 0.5, 0.1, false};
  if (name == "vehicle") return {name, {212, 217, 218, 199}, 18, 6, 3, 1.2, 1.0, 0.5, false};
  if (name == "biodeg") return {name, {356, 699}, 41, 8, 3, 0.8, 1.0, 0.3, false};
  if (name == "yeast") return {name, {463, 429, 244, 163, 51, 44, 35, 30, 20, 5}, 8, 5, 1, 0.9, 1.0, 0.2, false};
  if (name == "satellite") return {name, {1533, 703, 1358, 626, 707, 1508}, 36, 4, 3, 2.0, 1.0, 0.5, true};
  throw Error(ErrorKind::InvalidArgument, "unknown synthetic dataset '" + name + "'", {{"name", name}});
}

Dataset synthetic_dataset(const std::string& name, std::uint64_t seed) {
  return make_dataset(generate_mixture(synthetic_spec(name), seed));
}

std::string to_csv(const Encoded& data) {
  std::string out;
  for (const auto& f : data.dictionaries.feature_names) out += f + ",";
  out += "label\n";
  for (Eigen::Index n = 0; n < data.X.rows(); ++n) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) out += fmt::format("{},", data.X(n, j));
    out += data.dictionaries.labels[std::size_t(data.y[std::size_t(n)])] + "\n";
  }
  return out;
}

}  // namespace tsk
