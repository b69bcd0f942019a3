#pragma once

#include "prescriptor/common.hpp"

#include <functional>
#include <vector>

namespace prescriptor {

// Raised when a compact kernel leaves no training point with positive weight.
class EmptyNeighborhoodError : public std::invalid_argument {
 public:
  EmptyNeighborhoodError() : std::invalid_argument("empty neighborhood at query point") {}
};

struct WeightEntry {
  std::size_t index;
  double weight;
};

// Sparse weights over training observations. Entries are kept sorted by index.
struct WeightVector {
  std::vector<WeightEntry> entries;
  std::size_t n_train = 0;

  double total() const;
  double negative_mass() const;
  bool has_negative() const;
  // Dense copy of length n_train.
  Vector dense() const;
  // Sorts by index and checks uniqueness, range and finiteness.
  void canonicalize();

  static WeightVector uniform(std::size_t n);
  // Normalizes positive proportional weights, dropping exact zeros.
  static WeightVector from_proportional(std::vector<WeightEntry> raw, std::size_t n_train);
};

enum class KernelKind { naive, epanechnikov, tricubic, gaussian };

KernelKind kernel_from_name(const std::string& name);
std::string kernel_name(KernelKind kind);

// K(u) evaluated through the Euclidean norm of u.
double kernel_eval(KernelKind kind, double norm);
double kernel_eval(KernelKind kind, const Vector& u);

struct BandwidthSchedule {
  enum class Mode { fixed_per_n, per_point, knn_adaptive };
  double c = 1.0;
  double delta_exp = 0.5;
  Mode mode = Mode::fixed_per_n;

  // h_N = c N^-delta.
  double at_sample_size(std::size_t n) const;
  // h_i = c i^-delta for the 1-based observation index i.
  double at_point(std::size_t i) const;
  void validate() const;
};

// Euclidean distances from x to every row of X.
Vector distances_to(const Matrix& X, const Vector& x);

// Indices of the k nearest rows, closest first, ties broken by lower index.
std::vector<std::size_t> nearest_indices(const Vector& dist, std::size_t k);

WeightVector knn_weights(const Matrix& train_X, const Vector& x, std::size_t k);

using DecayFunction = std::function<double(double)>;
WeightVector radius_knn_weights(const Matrix& train_X, const Vector& x, std::size_t k,
                                const DecayFunction& decay);

WeightVector kr_weights(const Matrix& train_X, const Vector& x, KernelKind kind, double h);

// Per-observation bandwidths h_i; the naive kernel is the default.
WeightVector recursive_kr_weights(const Matrix& train_X, const Vector& x,
                                  const BandwidthSchedule& schedule,
                                  KernelKind kind = KernelKind::naive);

// Local-linear equivalent-kernel weights with h_N(x) the distance to the
// k-th nearest neighbour. Entries may be negative.
WeightVector loess_weights(const Matrix& train_X, const Vector& x, std::size_t k,
                           KernelKind kind = KernelKind::tricubic);

// Default tuning schedules for a training set of size n with dx features.
struct DefaultSchedules {
  static std::size_t knn_k(std::size_t n);
  static double kr_bandwidth(std::size_t n, std::size_t dx);
  static BandwidthSchedule recursive(std::size_t dx);
  static std::size_t loess_k(std::size_t n, std::size_t dx);
};

// Column standardization fitted on training data.
class Standardizer {
 public:
  Standardizer() = default;
  explicit Standardizer(const Matrix& X);
  Matrix transform(const Matrix& X) const;
  Vector transform(const Vector& x) const;

 private:
  Vector mean_;
  Vector scale_;
};

}  // namespace prescriptor
