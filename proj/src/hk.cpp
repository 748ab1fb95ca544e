#include "sdnet/hk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sdnet {

namespace {

double weight(const HKModelSpec& spec, std::size_t i, std::size_t j) {
  return spec.weights ? (*spec.weights)(i, j) : 1.0;
}

bool allowed(const HKModelSpec& spec, std::size_t i, std::size_t j) {
  return i == j || !spec.restriction || spec.restriction->contains(i, j);
}

const NetworkFlags kHKFlags{.symmetric = true, .binary = true, .self_loops = true};

bool identical_bounds(const HKModelSpec& spec, std::size_t n) {
  if (std::holds_alternative<Homogeneous>(spec.confidence)) return true;
  if (const auto* e = std::get_if<EdgeHeterogeneous>(&spec.confidence)) {
    std::optional<double> first;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || !allowed(spec, i, j)) continue;  // unused bounds
        if (!first) first = e->epsilon(i, j);
        if (e->epsilon(i, j) != *first) return false;
      }
    return true;
  }
  return false;
}

}  // namespace

void validate(const HKModelSpec& spec, std::size_t n) {
  validate(spec.confidence, n);
  if (spec.restriction && spec.restriction->n() != n) {
    throw std::invalid_argument("restriction graph has " + std::to_string(spec.restriction->n()) +
                                " nodes, profile has " + std::to_string(n));
  }
  if (spec.weights) {
    const Matrix& w = *spec.weights;
    if (static_cast<std::size_t>(w.rows()) != n || static_cast<std::size_t>(w.cols()) != n) {
      throw std::invalid_argument("weight matrix must be n x n");
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (!(w(i, j) > 0.0) || !std::isfinite(w(i, j)) || w(i, j) != w(j, i)) {
          throw std::invalid_argument("weights must be symmetric and positive");
        }
      }
  }
}

SumConvention convention(const HKModelSpec& spec) {
  if (spec.restriction || std::holds_alternative<EdgeHeterogeneous>(spec.confidence)) {
    return SumConvention::restricted_edges;
  }
  return SumConvention::ordered_pairs;
}

NetworkMatrix neighbor_network(const OpinionProfile& x, const HKModelSpec& spec) {
  validate(spec, x.n());
  const std::size_t n = x.n();
  Matrix a = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!allowed(spec, i, j)) continue;
      const double eps = pair_bound(spec.confidence, i, j);
      if (x.squared_distance(i, j) <= eps * eps) a(i, j) = a(j, i) = 1.0;
    }
  }
  return NetworkMatrix(std::move(a), kHKFlags);
}

NetworkMatrix hk_lambda_minimizer(const OpinionProfile& x, const HKModelSpec& spec) {
  validate(spec, x.n());
  const std::size_t n = x.n();
  Matrix a = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!allowed(spec, i, j)) continue;  // forced to zero by the constraint set
      const double eps = (i == j) ? 0.0 : pair_bound(spec.confidence, i, j);
      // Self terms carry -eps^2 under the ordered convention and nothing under
      // the restricted one; lambda_ii = 1 is optimal (or free) in both.
      const double coeff = weight(spec, i, j) * (x.squared_distance(i, j) - eps * eps);
      if (coeff <= 0.0) a(i, j) = 1.0;
    }
  }
  return NetworkMatrix(std::move(a), kHKFlags);
}

double hk_objective(const OpinionProfile& y, const NetworkMatrix& lambda,
                    const HKModelSpec& spec) {
  const std::size_t n = y.n();
  if (lambda.n() != n) throw std::invalid_argument("hk_objective: size mismatch");
  double f = 0.0;
  if (convention(spec) == SumConvention::ordered_pairs) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double eps = pair_bound(spec.confidence, i, j);
        f += weight(spec, i, j) * lambda(i, j) * (y.squared_distance(i, j) - eps * eps);
      }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!allowed(spec, i, j)) continue;
        const double eps = pair_bound(spec.confidence, i, j);
        f += weight(spec, i, j) * lambda(i, j) * (y.squared_distance(i, j) - eps * eps);
      }
  }
  return f;
}

Matrix hk_update_matrix(const NetworkMatrix& lambda, const HKModelSpec& spec) {
  const std::size_t n = lambda.n();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = weight(spec, i, j) * lambda(i, j);
  if (const auto* nb = std::get_if<NodeBinary>(&spec.confidence)) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!nb->stubborn[i]) continue;
      a.row(i).setZero();
      a(i, i) = 1.0;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double mass = a.row(i).sum();
    if (!(mass > 0.0)) throw std::logic_error("update matrix row " + std::to_string(i) + " empty");
    a.row(i) /= mass;
  }
  return a;
}

OpinionProfile hk_step(const OpinionProfile& x, const NetworkMatrix& lambda,
                       const HKModelSpec& spec) {
  const std::size_t n = x.n();
  const std::size_t d = x.d();
  if (lambda.n() != n) throw std::invalid_argument("hk_step: size mismatch");
  const auto* nb = std::get_if<NodeBinary>(&spec.confidence);
  Matrix out(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    if (nb && nb->stubborn[i]) {
      out.row(i) = x.values().row(i);
      continue;
    }
    for (std::size_t k = 0; k < d; ++k) {
      double num = 0.0;
      double mass = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double c = spec.weights ? (*spec.weights)(i, j) * lambda(i, j) : lambda(i, j);
        num += c * x(j, k);
        mass += c;
      }
      if (!(mass > 0.0)) {
        throw std::logic_error("hk_step: agent " + std::to_string(i) + " has no neighbors");
      }
      out(i, k) = num / mass;
    }
  }
  return OpinionProfile(std::move(out));
}

double hk_lyapunov(const OpinionProfile& x, const HKModelSpec& spec) {
  validate(spec, x.n());
  const std::size_t n = x.n();
  double v = 0.0;
  if (convention(spec) == SumConvention::ordered_pairs) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double eps = pair_bound(spec.confidence, i, j);
        v += weight(spec, i, j) * std::min(0.0, x.squared_distance(i, j) - eps * eps);
      }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!allowed(spec, i, j)) continue;
        const double eps = pair_bound(spec.confidence, i, j);
        v += weight(spec, i, j) * std::min(0.0, x.squared_distance(i, j) - eps * eps);
      }
  }
  return v;
}

DriftCertificate drift_certificate_restricted(const OpinionProfile& x, const HKModelSpec& spec) {
  validate(spec, x.n());
  if (!identical_bounds(spec, x.n())) {
    throw std::invalid_argument("drift certificate needs identical confidence bounds");
  }
  if (spec.weights) throw std::invalid_argument("drift certificate needs unit weights");
  const OpinionProfile next = hk_step(x, neighbor_network(x, spec), spec);
  return {hk_lyapunov(x, spec) - hk_lyapunov(next, spec), (next.values() - x.values()).squaredNorm()};
}

// ---------------------------------------------------------------------------
// 0-1 model

ZeroOnePartition::ZeroOnePartition(std::size_t n, std::vector<std::size_t> stubborn)
    : n_(n), mask_(n, false) {
  for (std::size_t i : stubborn) {
    if (i >= n) throw std::invalid_argument("stubborn agent " + std::to_string(i) + " >= n");
    if (mask_[i]) throw std::invalid_argument("stubborn agent " + std::to_string(i) + " repeated");
    mask_[i] = true;
  }
  for (std::size_t i = 0; i < n; ++i) (mask_[i] ? s0_ : s1_).push_back(i);
}

ZeroOnePartition::ZeroOnePartition(const NodeBinary& nb) : n_(nb.stubborn.size()), mask_(nb.stubborn) {
  for (std::size_t i = 0; i < n_; ++i) (mask_[i] ? s0_ : s1_).push_back(i);
}

ZeroOneBlocks zero_one_blocks(const NetworkMatrix& lambda, const ZeroOnePartition& part) {
  const auto& s0 = part.stubborn();
  const auto& s1 = part.moving();
  const Matrix& a = lambda.entries();
  const Vector deg = lambda.row_sums();
  auto sub = [&](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
    Matrix m(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols.size(); ++c) m(r, c) = a(rows[r], cols[c]);
    return m;
  };
  auto degrees = [&](const std::vector<std::size_t>& rows) {
    Vector v(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) v(r) = deg(rows[r]);
    return Matrix(v.asDiagonal());
  };
  ZeroOneBlocks b;
  b.r0 = sub(s0, s0);
  b.r1 = sub(s1, s1);
  b.m = sub(s1, s0);
  b.d0 = degrees(s0);
  b.d1 = degrees(s1);
  b.q = b.d1 + b.r1;
  return b;
}

bool strictly_diagonally_dominant(const Matrix& q) {
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < q.cols(); ++j)
      if (j != i) off += std::abs(q(i, j));
    if (!(q(i, i) > off)) return false;
  }
  return true;
}

NetworkMatrix zero_one_actual_network(const OpinionProfile& x, const ZeroOnePartition& part,
                                      double epsilon) {
  const HKModelSpec sym{part.as_confidence(epsilon), std::nullopt, std::nullopt};
  Matrix a = neighbor_network(x, sym).entries();
  for (std::size_t i : part.stubborn()) {
    a.row(i).setZero();
    a(i, i) = 1.0;
  }
  return NetworkMatrix(std::move(a), {.symmetric = false, .binary = true, .self_loops = true});
}

OpinionProfile zero_one_apply(const OpinionProfile& x, const NetworkMatrix& lambda,
                              const ZeroOnePartition& part) {
  if (part.n() != x.n()) throw std::invalid_argument("partition size differs from profile");
  const HKModelSpec spec{part.as_confidence(), std::nullopt, std::nullopt};
  return hk_step(x, lambda, spec);
}

OpinionProfile zero_one_step(const OpinionProfile& x, const ZeroOnePartition& part,
                             double epsilon) {
  const HKModelSpec spec{part.as_confidence(epsilon), std::nullopt, std::nullopt};
  return hk_step(x, neighbor_network(x, spec), spec);
}

bool DriftIdentity::holds(double tol) const { return std::abs(lhs - rhs) <= tol; }

DriftIdentity zero_one_drift_identity(const OpinionProfile& x, const ZeroOnePartition& part,
                                      double epsilon) {
  const HKModelSpec spec{part.as_confidence(epsilon), std::nullopt, std::nullopt};
  const NetworkMatrix lambda = neighbor_network(x, spec);
  const OpinionProfile next = hk_step(x, lambda, spec);
  const Matrix lap = laplacian(lambda);

  DriftIdentity out;
  out.lhs = quadratic_form(x, lap) - quadratic_form(next, lap);

  const ZeroOneBlocks blocks = zero_one_blocks(lambda, part);
  const auto& s1 = part.moving();
  for (std::size_t k = 0; k < x.d(); ++k) {
    Vector delta(s1.size());
    for (std::size_t r = 0; r < s1.size(); ++r) delta(r) = x(s1[r], k) - next(s1[r], k);
    out.rhs += delta.dot(blocks.q * delta);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Network freeze

FreezeReport detect_network_freeze(const TrajectoryRecord& traj, double delta) {
  FreezeReport report;
  const auto& steps = traj.steps;
  if (steps.empty()) return report;
  report.tail_certified = traj.stop == StopReason::converged;

  // tail[t] = sum_{k > t} movement_k^2, with movement_k = ||x(k) - x(k-1)||.
  const std::size_t len = steps.size();
  std::vector<double> tail(len, 0.0);
  for (std::size_t t = len - 1; t-- > 0;) {
    tail[t] = tail[t + 1] + steps[t + 1].movement * steps[t + 1].movement;
  }
  const double threshold = delta * delta;
  for (std::size_t t = 0; t < len; ++t) {
    if (tail[t] < threshold) {
      report.freeze_index = t;
      report.tail_sum = tail[t];
      break;
    }
  }
  if (!report.freeze_index) return report;
  for (std::size_t k = *report.freeze_index + 1; k < len; ++k) {
    if (!(steps[k].lambda == steps[k - 1].lambda)) {
      report.change_after = true;
      report.change_index = k - 1;
      break;
    }
  }
  return report;
}

double post_freeze_rate(const TrajectoryRecord& traj, std::size_t from, double floor) {
  const auto& steps = traj.steps;
  if (steps.empty() || from + 1 >= steps.size()) return 0.0;
  const Matrix& last = steps.back().x.values();
  double log_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t t = from; t + 1 < steps.size(); ++t) {
    const double e0 = (steps[t].x.values() - last).norm();
    const double e1 = (steps[t + 1].x.values() - last).norm();
    if (e0 <= floor || e1 <= floor) continue;
    log_sum += std::log(e1 / e0);
    ++pairs;
  }
  return pairs == 0 ? 0.0 : std::exp(log_sum / static_cast<double>(pairs));
}

// ---------------------------------------------------------------------------
// BCD instantiations

namespace {

double weighted_potential(const OpinionProfile& y, const NetworkMatrix& lambda,
                          const HKModelSpec& spec) {
  const std::size_t n = y.n();
  const bool ordered = convention(spec) == SumConvention::ordered_pairs;
  double phi = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = ordered ? 0 : i + 1; j < n; ++j) {
      if (!allowed(spec, i, j)) continue;
      phi += weight(spec, i, j) * lambda(i, j) * y.squared_distance(i, j);
    }
  return phi;
}

double bound_cost(const NetworkMatrix& lambda, const HKModelSpec& spec) {
  const std::size_t n = lambda.n();
  const bool ordered = convention(spec) == SumConvention::ordered_pairs;
  double c = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = ordered ? 0 : i + 1; j < n; ++j) {
      if (!allowed(spec, i, j)) continue;
      const double eps = pair_bound(spec.confidence, i, j);
      c -= weight(spec, i, j) * lambda(i, j) * eps * eps;
    }
  return c;
}

}  // namespace

CoupledModel make_hk_model(const HKModelSpec& spec) {
  CoupledModel m;
  m.name = std::holds_alternative<NodeBinary>(spec.confidence) ? "hk-01"
           : convention(spec) == SumConvention::restricted_edges ? "hk-restricted"
                                                                 : "hk";
  m.kind = ValueKind::scalar;
  m.state_update = [spec](const OpinionProfile& x, const NetworkMatrix& l) {
    return hk_step(x, l, spec);
  };
  m.network_update = [spec](const OpinionProfile& x) { return neighbor_network(x, spec); };
  m.potential = [spec](const OpinionProfile& y, const NetworkMatrix& l) -> OrderedValue {
    return weighted_potential(y, l, spec);
  };
  m.network_cost = [spec](const NetworkMatrix& l) { return bound_cost(l, spec); };
  m.in_constraint_set = [spec](const NetworkMatrix& l) {
    const Matrix& a = l.entries();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (a(i, i) != 1.0) return false;
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if (a(i, j) != a(j, i) || a(i, j) < 0.0 || a(i, j) > 1.0) return false;
        if (a(i, j) != 0.0 && !allowed(spec, i, j)) return false;
      }
    }
    return true;
  };
  return m;
}

CoupledModel make_zero_one_model(const ZeroOnePartition& part, double epsilon) {
  return make_hk_model(HKModelSpec{part.as_confidence(epsilon), std::nullopt, std::nullopt});
}

}  // namespace sdnet
