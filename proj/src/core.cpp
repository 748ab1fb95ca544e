#include "sdnet/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sdnet {

namespace {

std::string idx(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

// ---------------------------------------------------------------------------
// OpinionProfile

OpinionProfile::OpinionProfile(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw std::invalid_argument("opinion profile needs n >= 1 and d >= 1");
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("opinion profile has non-finite entries");
  }
}

OpinionProfile OpinionProfile::scalar(std::span<const double> xs) {
  Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = xs[i];
  return OpinionProfile(std::move(m));
}

OpinionProfile OpinionProfile::scalar(std::initializer_list<double> xs) {
  return scalar(std::span<const double>(xs.begin(), xs.size()));
}

double OpinionProfile::squared_distance(std::size_t i, std::size_t j) const {
  double s = 0.0;
  for (Eigen::Index k = 0; k < values_.cols(); ++k) {
    const double diff = values_(i, k) - values_(j, k);
    s += diff * diff;
  }
  return s;
}

double OpinionProfile::distance(std::size_t i, std::size_t j) const {
  return std::sqrt(squared_distance(i, j));
}

bool OpinionProfile::operator==(const OpinionProfile& other) const {
  return values_.rows() == other.values_.rows() && values_.cols() == other.values_.cols() &&
         values_ == other.values_;
}

double movement(const OpinionProfile& a, const OpinionProfile& b) {
  if (a.n() != b.n() || a.d() != b.d()) {
    throw std::invalid_argument("movement: profile shapes differ");
  }
  return (b.values() - a.values()).norm();
}

double diameter(const OpinionProfile& x) {
  double best = 0.0;
  for (std::size_t i = 0; i < x.n(); ++i)
    for (std::size_t j = i + 1; j < x.n(); ++j) best = std::max(best, x.squared_distance(i, j));
  return std::sqrt(best);
}

// ---------------------------------------------------------------------------
// NetworkMatrix

NetworkMatrix::NetworkMatrix(Matrix entries, NetworkFlags flags)
    : entries_(std::move(entries)), flags_(flags) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    throw std::invalid_argument("network matrix must be square and non-empty");
  }
  const auto n = entries_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = entries_(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("network entry " + idx(i, j) + " outside [0,1]");
      }
      if (flags_.binary && v != 0.0 && v != 1.0) {
        throw std::invalid_argument("binary network has fractional entry at " + idx(i, j));
      }
      if (flags_.symmetric && v != entries_(j, i)) {
        throw std::invalid_argument("symmetric network differs at " + idx(i, j));
      }
    }
    if (!flags_.self_loops && entries_(i, i) != 0.0) {
      throw std::invalid_argument("self-loop at " + idx(i, i) + " but self_loops is false");
    }
  }
}

bool NetworkMatrix::operator==(const NetworkMatrix& other) const {
  return flags_ == other.flags_ && entries_.rows() == other.entries_.rows() &&
         entries_ == other.entries_;
}

// ---------------------------------------------------------------------------
// Confidence specs and restriction graphs

void validate(const ConfidenceSpec& spec, std::size_t n) {
  if (const auto* h = std::get_if<Homogeneous>(&spec)) {
    if (!(h->epsilon > 0.0) || !std::isfinite(h->epsilon)) {
      throw std::invalid_argument("confidence bound must be a positive finite number");
    }
  } else if (const auto* e = std::get_if<EdgeHeterogeneous>(&spec)) {
    if (static_cast<std::size_t>(e->epsilon.rows()) != n ||
        static_cast<std::size_t>(e->epsilon.cols()) != n) {
      throw std::invalid_argument("edge bound map must be n x n");
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double v = e->epsilon(i, j);
        if (!(v > 0.0) || !std::isfinite(v)) {
          throw std::invalid_argument("edge bound " + idx(i, j) + " must be positive");
        }
        if (v != e->epsilon(j, i)) {
          throw std::invalid_argument("edge bounds " + idx(i, j) + " and " + idx(j, i) +
                                      " differ");
        }
      }
    }
  } else {
    const auto& b = std::get<NodeBinary>(spec);
    if (b.stubborn.size() != n) {
      throw std::invalid_argument("node partition must label all " + std::to_string(n) +
                                  " agents");
    }
    if (!(b.epsilon > 0.0)) throw std::invalid_argument("0-1 bound must be positive");
  }
}

double pair_bound(const ConfidenceSpec& spec, std::size_t i, std::size_t j) {
  if (const auto* h = std::get_if<Homogeneous>(&spec)) return h->epsilon;
  if (const auto* e = std::get_if<EdgeHeterogeneous>(&spec)) return e->epsilon(i, j);
  return std::get<NodeBinary>(spec).epsilon;
}

RestrictionGraph::RestrictionGraph(std::size_t n, std::span<const Edge> edges) : n_(n) {
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) {
      throw std::invalid_argument("restriction edge " + idx(a, b) + " references a missing node");
    }
    if (a == b) throw std::invalid_argument("restriction edge " + idx(a, b) + " is a loop");
    const Edge e{std::min(a, b), std::max(a, b)};
    if (!edges_.insert(e).second) {
      throw std::invalid_argument("duplicate restriction edge " + idx(e.first, e.second));
    }
  }
}

RestrictionGraph RestrictionGraph::complete(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return RestrictionGraph(n, edges);
}

bool RestrictionGraph::contains(std::size_t i, std::size_t j) const {
  return edges_.count({std::min(i, j), std::max(i, j)}) > 0;
}

// ---------------------------------------------------------------------------
// Lexicographic values

LexValue::LexValue(std::vector<double> sorted_entries) : entries_(std::move(sorted_entries)) {
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (!(entries_[k] >= 0.0) || !std::isfinite(entries_[k])) {
      throw std::invalid_argument("lex value entries must be finite and nonnegative");
    }
    if (k > 0 && entries_[k] < entries_[k - 1]) {
      throw std::invalid_argument("lex value entries must be sorted nondecreasing");
    }
  }
}

LexValue LexValue::from_unsorted(std::vector<double> entries) {
  std::sort(entries.begin(), entries.end());
  return LexValue(std::move(entries));
}

Ordering lex_compare(const LexValue& u, const LexValue& v, double tol) {
  if (u.size() != v.size()) throw std::invalid_argument("lex_compare: length mismatch");
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u[k] == v[k]) continue;
    // only the first differing coordinate matters, even when the gap is tiny
    const double diff = u[k] - v[k];
    if (std::abs(diff) <= tol) return Ordering::equal;
    return diff < 0 ? Ordering::less : Ordering::greater;
  }
  return Ordering::equal;
}

Ordering compare(const OrderedValue& a, const OrderedValue& b, double tol) {
  if (a.index() != b.index()) throw std::invalid_argument("compare: mixed value kinds");
  if (const auto* x = std::get_if<double>(&a)) {
    const double diff = *x - std::get<double>(b);
    if (std::abs(diff) <= tol) return Ordering::equal;
    return diff < 0 ? Ordering::less : Ordering::greater;
  }
  return lex_compare(std::get<LexValue>(a), std::get<LexValue>(b), tol);
}

std::string to_string(const OrderedValue& v) {
  char buf[32];
  if (const auto* x = std::get_if<double>(&v)) {
    std::snprintf(buf, sizeof buf, "%.17g", *x);
    return buf;
  }
  std::string out;
  for (double e : std::get<LexValue>(v).entries()) {
    if (!out.empty()) out += ';';
    std::snprintf(buf, sizeof buf, "%.17g", e);
    out += buf;
  }
  return out;
}

void TrajectoryRecord::append(TrajectoryStep step) {
  const std::size_t expected = steps.size();
  if (step.t != expected) {
    throw std::logic_error("trajectory index " + std::to_string(step.t) + " where " +
                           std::to_string(expected) + " was expected");
  }
  steps.push_back(std::move(step));
}

// ---------------------------------------------------------------------------
// RNG

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::size_t RngStream::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::index: empty range");
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % range);
}

RngStream RngStream::derive(std::uint64_t seed, std::uint64_t k) {
  return RngStream(splitmix64(seed ^ splitmix64(k + 0x632be59bd9b4e019ULL)));
}

OpinionProfile uniform_profile(RngStream& rng, std::size_t n, std::size_t d, double lo,
                               double hi) {
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = rng.uniform(lo, hi);
  return OpinionProfile(std::move(m));
}

// ---------------------------------------------------------------------------
// Linear algebra

Matrix laplacian(const NetworkMatrix& lambda) {
  Matrix l = -lambda.entries();
  l.diagonal() += lambda.row_sums();
  return l;
}

double quadratic_form(const OpinionProfile& y, const Matrix& m) {
  if (static_cast<std::size_t>(m.rows()) != y.n() || static_cast<std::size_t>(m.cols()) != y.n()) {
    throw std::invalid_argument("quadratic_form: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", profile has " +
                                std::to_string(y.n()) + " agents");
  }
  double s = 0.0;
  for (Eigen::Index k = 0; k < y.values().cols(); ++k) {
    const Vector col = y.values().col(k);
    s += col.dot(m * col);
  }
  return s;
}

}  // namespace sdnet
