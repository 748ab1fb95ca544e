#include "sdnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace sdnet {

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

void require_square(const Matrix& w, const char* who) {
  if (w.rows() != w.cols()) throw std::invalid_argument(std::string(who) + ": matrix not square");
}

}  // namespace

bool is_connected(const Matrix& w, double threshold) {
  require_square(w, "is_connected");
  const auto n = static_cast<std::size_t>(w.rows());
  if (n == 0) return true;
  DisjointSets ds(n);
  std::size_t parts = n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((w(i, j) > threshold || w(j, i) > threshold) && ds.unite(i, j)) --parts;
  return parts == 1;
}

std::size_t edge_count(const Matrix& w) {
  require_square(w, "edge_count");
  std::size_t m = 0;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = i + 1; j < w.cols(); ++j)
      if (w(i, j) != 0.0 || w(j, i) != 0.0) ++m;
  return m;
}

bool is_spanning_tree(const Matrix& w) {
  return w.rows() >= 1 && edge_count(w) + 1 == static_cast<std::size_t>(w.rows()) &&
         is_connected(w);
}

MinCut global_min_cut(const Matrix& w) {
  require_square(w, "global_min_cut");
  const auto n = static_cast<std::size_t>(w.rows());
  if (n < 2) throw std::invalid_argument("global_min_cut: need at least two nodes");

  Matrix g = w;
  // members[v] lists original nodes merged into super-node v
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t v = 0; v < n; ++v) members[v] = {v};
  std::vector<std::size_t> alive(n);
  std::iota(alive.begin(), alive.end(), 0);

  MinCut best;
  best.weight = std::numeric_limits<double>::infinity();

  while (alive.size() > 1) {
    const std::size_t k = alive.size();
    std::vector<double> key(k, 0.0);
    std::vector<bool> added(k, false);
    std::size_t prev = 0, last = 0;
    for (std::size_t step = 0; step < k; ++step) {
      std::size_t sel = k;
      for (std::size_t a = 0; a < k; ++a)
        if (!added[a] && (sel == k || key[a] > key[sel])) sel = a;
      added[sel] = true;
      prev = last;
      last = sel;
      if (step + 1 == k) break;
      for (std::size_t a = 0; a < k; ++a)
        if (!added[a]) key[a] += g(alive[sel], alive[a]);
    }
    const double phase = key[last];
    if (phase < best.weight) {
      best.weight = phase;
      best.side.assign(n, false);
      for (std::size_t v : members[alive[last]]) best.side[v] = true;
    }
    const std::size_t s = alive[prev], t = alive[last];
    for (std::size_t a : alive) {
      g(s, a) += g(t, a);
      g(a, s) = g(s, a);
    }
    g(s, s) = 0.0;
    members[s].insert(members[s].end(), members[t].begin(), members[t].end());
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(last));
  }
  return best;
}

std::vector<std::pair<std::size_t, std::size_t>> minimum_spanning_tree(const Matrix& w) {
  require_square(w, "minimum_spanning_tree");
  const auto n = static_cast<std::size_t>(w.rows());
  std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(w(i, j), i, j);
  std::sort(edges.begin(), edges.end());
  DisjointSets ds(n);
  std::vector<std::pair<std::size_t, std::size_t>> tree;
  for (const auto& [c, i, j] : edges) {
    if (tree.size() + 1 >= n) break;
    if (ds.unite(i, j)) tree.emplace_back(i, j);
  }
  return tree;
}

namespace {

constexpr double kPivotTol = 1e-10;

// Tableau layout: rows 0..m-1 constraints, last column rhs; basis[r] is the
// basic column of row r.
struct Tableau {
  Matrix t;
  std::vector<std::size_t> basis;

  void pivot(std::size_t r, std::size_t c) {
    t.row(r) /= t(r, c);
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      if (static_cast<std::size_t>(i) != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    basis[r] = c;
  }

  // Minimizes the objective stored in the last row over columns < ncols.
  // Returns false when unbounded.
  bool optimize(std::size_t ncols) {
    const auto m = static_cast<std::size_t>(t.rows()) - 1;
    const auto rhs = t.cols() - 1;
    for (;;) {
      std::size_t enter = ncols;
      for (std::size_t c = 0; c < ncols; ++c)
        if (t(m, c) < -kPivotTol) {
          enter = c;
          break;
        }
      if (enter == ncols) return true;
      std::size_t leave = m;
      double best = 0.0;
      for (std::size_t r = 0; r < m; ++r) {
        if (t(r, enter) <= kPivotTol) continue;
        const double ratio = t(r, rhs) / t(r, enter);
        if (leave == m || ratio < best - kPivotTol ||
            (std::abs(ratio - best) <= kPivotTol && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

std::optional<Vector> solve_standard_lp(const Matrix& a, const Vector& b, const Vector& c) {
  const auto m = static_cast<std::size_t>(a.rows());
  const auto nv = static_cast<std::size_t>(a.cols());
  if (static_cast<std::size_t>(b.size()) != m || static_cast<std::size_t>(c.size()) != nv) {
    throw std::invalid_argument("solve_standard_lp: dimension mismatch");
  }
  // columns: nv structural, m artificial, then rhs
  Tableau tab;
  tab.t = Matrix::Zero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(nv + m + 1));
  tab.basis.resize(m);
  const auto rhs = static_cast<Eigen::Index>(nv + m);
  for (std::size_t r = 0; r < m; ++r) {
    const double sgn = b(r) < 0.0 ? -1.0 : 1.0;
    tab.t.row(r).head(nv) = sgn * a.row(r);
    tab.t(r, nv + r) = 1.0;
    tab.t(r, rhs) = sgn * b(r);
    tab.basis[r] = nv + r;
  }
  // phase one: minimize the sum of artificials
  for (std::size_t r = 0; r < m; ++r) tab.t.row(m) -= tab.t.row(r);
  for (std::size_t r = 0; r < m; ++r) tab.t(m, nv + r) = 0.0;
  if (!tab.optimize(nv + m)) throw std::logic_error("solve_standard_lp: phase one unbounded");
  if (tab.t(m, rhs) < -1e-8) return std::nullopt;

  // drive remaining artificials out of the basis where possible
  for (std::size_t r = 0; r < m; ++r) {
    if (tab.basis[r] < nv) continue;
    for (std::size_t col = 0; col < nv; ++col)
      if (std::abs(tab.t(r, col)) > kPivotTol) {
        tab.pivot(r, col);
        break;
      }
  }

  // phase two
  tab.t.row(m).setZero();
  for (std::size_t col = 0; col < nv; ++col) tab.t(m, col) = c(col);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t bc = tab.basis[r];
    if (bc < nv && tab.t(m, bc) != 0.0) tab.t.row(m) -= tab.t(m, bc) * tab.t.row(r);
  }
  // artificial columns are barred from re-entering
  if (!tab.optimize(nv)) throw std::runtime_error("solve_standard_lp: unbounded");

  Vector x = Vector::Zero(static_cast<Eigen::Index>(nv));
  for (std::size_t r = 0; r < m; ++r)
    if (tab.basis[r] < nv) x(tab.basis[r]) = tab.t(r, rhs);
  return x;
}

}  // namespace sdnet
