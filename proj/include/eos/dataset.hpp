#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace eos {

/// Regression/classification samples stored feature-major: feature f of
/// sample i lives at features[f * n + i], so per-feature rows are contiguous
/// across samples (the layout the MLP kernels stream over).
struct Dataset {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> features;
  std::vector<double> targets;

  std::span<const double> feature_row(std::size_t f) const {
    return {features.data() + f * n, n};
  }
};

struct SyntheticSpec {
  std::size_t n = 100;
  std::size_t k = 2;
  double input_std = 1.0;
  std::uint64_t seed = 0;
  bool binary_labels = false;
};

/// Gaussian inputs, targets sin(2π x₀) + 0.5 x₁ (x₁ term dropped when k = 1);
/// binary labels are 1 where that function is positive, else 0.
Dataset make_synthetic(const SyntheticSpec& spec);

/// CSV with a header row naming x0..x{k-1} and y (any column order).
Dataset load_csv(const std::filesystem::path& path);

}  // namespace eos
