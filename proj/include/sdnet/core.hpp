#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace sdnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default absolute tolerance for Lyapunov comparisons.
inline constexpr double kLyapunovTol = 1e-9;

/// n x d matrix of agent states. Row i is agent i's opinion.
class OpinionProfile {
 public:
  explicit OpinionProfile(Matrix values);

  /// One-dimensional profile from a list of scalars.
  static OpinionProfile scalar(std::span<const double> xs);
  static OpinionProfile scalar(std::initializer_list<double> xs);

  std::size_t n() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(values_.cols()); }
  const Matrix& values() const { return values_; }
  double operator()(std::size_t i, std::size_t k) const { return values_(i, k); }
  Eigen::RowVectorXd row(std::size_t i) const { return values_.row(i); }

  double squared_distance(std::size_t i, std::size_t j) const;
  double distance(std::size_t i, std::size_t j) const;

  bool operator==(const OpinionProfile& other) const;

 private:
  Matrix values_;
};

/// Frobenius norm of b - a.
double movement(const OpinionProfile& a, const OpinionProfile& b);
/// max_{i,j} ||x_i - x_j||.
double diameter(const OpinionProfile& x);

struct NetworkFlags {
  bool symmetric = false;
  bool binary = false;
  bool self_loops = false;

  bool operator==(const NetworkFlags&) const = default;
};

/// Network block variable: an n x n matrix with entries in [0,1]. The flags
/// are checked claims, not hints.
class NetworkMatrix {
 public:
  NetworkMatrix(Matrix entries, NetworkFlags flags);

  std::size_t n() const { return static_cast<std::size_t>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  const NetworkFlags& flags() const { return flags_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }

  Vector row_sums() const { return entries_.rowwise().sum(); }

  bool operator==(const NetworkMatrix& other) const;

 private:
  Matrix entries_;
  NetworkFlags flags_;
};

// Confidence-bound structures.

struct Homogeneous {
  double epsilon;
  bool operator==(const Homogeneous&) const = default;
};

/// Pairwise bounds; only off-diagonal entries are used.
struct EdgeHeterogeneous {
  Matrix epsilon;
  bool operator==(const EdgeHeterogeneous& o) const { return epsilon == o.epsilon; }
};

/// 0-1 node partition. stubborn[i] == true means i is in S0 (bound 0);
/// every other agent has bound `epsilon` (1 after rescaling).
struct NodeBinary {
  std::vector<bool> stubborn;
  double epsilon = 1.0;
  bool operator==(const NodeBinary&) const = default;
};

using ConfidenceSpec = std::variant<Homogeneous, EdgeHeterogeneous, NodeBinary>;

/// Throws std::invalid_argument when the spec is inconsistent with n agents.
void validate(const ConfidenceSpec& spec, std::size_t n);

/// Bound used for pair (i,j), i != j. For NodeBinary this is the moving
/// agents' bound, which is also what the symmetrized network uses.
double pair_bound(const ConfidenceSpec& spec, std::size_t i, std::size_t j);

/// Undirected graph restricting which pairs may ever communicate.
class RestrictionGraph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  RestrictionGraph(std::size_t n, std::span<const Edge> edges);
  static RestrictionGraph complete(std::size_t n);

  std::size_t n() const { return n_; }
  const std::set<Edge>& edges() const { return edges_; }
  bool contains(std::size_t i, std::size_t j) const;

  bool operator==(const RestrictionGraph&) const = default;

 private:
  std::size_t n_;
  std::set<Edge> edges_;  // normalized first < second
};

/// Nonnegative vector sorted nondecreasing.
class LexValue {
 public:
  explicit LexValue(std::vector<double> sorted_entries);
  static LexValue from_unsorted(std::vector<double> entries);

  std::size_t size() const { return entries_.size(); }
  const std::vector<double>& entries() const { return entries_; }
  double operator[](std::size_t k) const { return entries_[k]; }

  bool operator==(const LexValue&) const = default;

 private:
  std::vector<double> entries_;
};

enum class Ordering { less, equal, greater };

/// The first coordinate where u and v differ decides; a gap there of at most
/// `tol` counts as equal. Later coordinates are never consulted, so a tiny
/// decrease followed by a large increase is not reported as an increase.
Ordering lex_compare(const LexValue& u, const LexValue& v, double tol = 0.0);

/// Codomain of a Lyapunov function: a real or a lexicographic vector.
using OrderedValue = std::variant<double, LexValue>;

Ordering compare(const OrderedValue& a, const OrderedValue& b, double tol = 0.0);
std::string to_string(const OrderedValue& v);

enum class StopReason { converged, max_iters };

struct TrajectoryStep {
  std::size_t t;
  OpinionProfile x;
  NetworkMatrix lambda;
  std::optional<OrderedValue> lyapunov;
  double movement;  // ||x(t) - x(t-1)||, zero at t = 0
};

struct TrajectoryRecord {
  std::vector<TrajectoryStep> steps;
  std::optional<std::uint64_t> seed;
  StopReason stop = StopReason::max_iters;

  /// Appends a step; throws std::logic_error if t is not the next index.
  void append(TrajectoryStep step);
  std::size_t size() const { return steps.size(); }
  const TrajectoryStep& back() const { return steps.back(); }
};

/// Seeded stream over std::mt19937_64. The engine output is fixed by the C++
/// standard; the conversions below avoid implementation-defined
/// distributions, so draws are identical across platforms.
class RngStream {
 public:
  static constexpr const char* algorithm = "mt19937_64";

  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0,1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n), unbiased.
  std::size_t index(std::size_t n);

  /// Independent stream for trial `k` of a batch seeded with `seed`.
  static RngStream derive(std::uint64_t seed, std::uint64_t k);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Profile with entries uniform in [lo, hi).
OpinionProfile uniform_profile(RngStream& rng, std::size_t n, std::size_t d,
                               double lo = 0.0, double hi = 1.0);

/// diag(lambda 1) - lambda.
Matrix laplacian(const NetworkMatrix& lambda);

/// Sum over the columns of y of y_k^T M y_k.
double quadratic_form(const OpinionProfile& y, const Matrix& m);

}  // namespace sdnet
