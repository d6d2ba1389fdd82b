#include "fgl/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace fgl {

AssignmentResult solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  AssignmentResult out;
  out.row_of_col.assign(n, 0);
  for (int j = 1; j <= n; ++j) {
    out.row_of_col[j - 1] = p[j] - 1;
    out.cost += cost[p[j] - 1][j - 1];
  }
  return out;
}

namespace {

// Spanning-tree basis for the transportation simplex.
struct Basis {
  int m, n;
  std::vector<std::vector<int>> adj;  // node -> incident basic cell ids
  std::vector<int> row_of, col_of;    // per basic cell
  std::vector<double> flow;

  int node_of_row(int i) const { return i; }
  int node_of_col(int j) const { return m + j; }

  int add_cell(int i, int j, double f) {
    const int id = static_cast<int>(row_of.size());
    row_of.push_back(i);
    col_of.push_back(j);
    flow.push_back(f);
    adj[node_of_row(i)].push_back(id);
    adj[node_of_col(j)].push_back(id);
    return id;
  }

  void remove_cell(int id) {
    auto drop = [this, id](int node) {
      auto& v = adj[node];
      v.erase(std::find(v.begin(), v.end(), id));
    };
    drop(node_of_row(row_of[id]));
    drop(node_of_col(col_of[id]));
    row_of[id] = col_of[id] = -1;
  }
};

}  // namespace

double solve_transport(const std::vector<double>& supply,
                       const std::vector<double>& demand,
                       const std::vector<std::vector<double>>& cost) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  double total_s = 0.0, total_d = 0.0;
  for (double s : supply) total_s += s;
  for (double d : demand) total_d += d;
  if (std::abs(total_s - total_d) > 1e-9 * std::max(total_s, 1.0))
    throw std::invalid_argument("transport: supply and demand totals differ");

  Basis basis;
  basis.m = m;
  basis.n = n;
  basis.adj.assign(m + n, {});

  // Northwest-corner start.
  {
    std::vector<double> a = supply, b = demand;
    int i = 0, j = 0;
    while (i < m && j < n) {
      const double f = std::min(a[i], b[j]);
      basis.add_cell(i, j, f);
      a[i] -= f;
      b[j] -= f;
      const bool row_done = a[i] <= b[j];
      if (row_done && i + 1 < m) {
        ++i;
      } else if (!row_done && j + 1 < n) {
        ++j;
      } else if (i + 1 < m) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  const int max_pivots = 200 * (m + n) + 10000;
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    // Potentials from the basis tree.
    std::vector<double> u(m, inf), v(n, inf);
    u[0] = 0.0;
    std::deque<int> queue{basis.node_of_row(0)};
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      for (int id : basis.adj[node]) {
        const int i = basis.row_of[id], j = basis.col_of[id];
        if (node < m) {
          if (v[j] == inf) {
            v[j] = cost[i][j] - u[i];
            queue.push_back(basis.node_of_col(j));
          }
        } else {
          if (u[i] == inf) {
            u[i] = cost[i][j] - v[j];
            queue.push_back(basis.node_of_row(i));
          }
        }
      }
    }

    // Entering cell: most negative reduced cost.
    int best_i = -1, best_j = -1;
    double best_rc = -1e-12;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        const double rc = cost[i][j] - u[i] - v[j];
        if (rc < best_rc) {
          best_rc = rc;
          best_i = i;
          best_j = j;
        }
      }
    if (best_i < 0) break;  // optimal

    // Unique basis-tree path from the entering row to the entering column.
    std::vector<int> prev_cell(m + n, -1), prev_node(m + n, -1);
    std::vector<char> seen(m + n, 0);
    std::deque<int> bfs{basis.node_of_row(best_i)};
    seen[basis.node_of_row(best_i)] = 1;
    while (!bfs.empty()) {
      const int node = bfs.front();
      bfs.pop_front();
      if (node == basis.node_of_col(best_j)) break;
      for (int id : basis.adj[node]) {
        const int other = (node < m) ? basis.node_of_col(basis.col_of[id])
                                     : basis.node_of_row(basis.row_of[id]);
        if (seen[other]) continue;
        seen[other] = 1;
        prev_cell[other] = id;
        prev_node[other] = node;
        bfs.push_back(other);
      }
    }

    // Alternate signs around the cycle; the entering cell is '+'.
    std::vector<int> minus_cells, plus_cells;
    {
      int node = basis.node_of_col(best_j);
      bool minus = true;  // edge adjacent to the entering column is '-'
      while (node != basis.node_of_row(best_i)) {
        const int id = prev_cell[node];
        (minus ? minus_cells : plus_cells).push_back(id);
        node = prev_node[node];
        minus = !minus;
      }
    }
    double theta = inf;
    int leaving = -1;
    for (int id : minus_cells)
      if (basis.flow[id] < theta) {
        theta = basis.flow[id];
        leaving = id;
      }
    for (int id : minus_cells) basis.flow[id] -= theta;
    for (int id : plus_cells) basis.flow[id] += theta;
    basis.remove_cell(leaving);
    basis.add_cell(best_i, best_j, theta);
  }

  double total = 0.0;
  for (std::size_t id = 0; id < basis.flow.size(); ++id)
    if (basis.row_of[id] >= 0)
      total += basis.flow[id] * cost[basis.row_of[id]][basis.col_of[id]];
  return total;
}

double wasserstein_d1(const Population& p, const Population& q,
                      std::size_t size_cap) {
  const std::size_t np = p.members.size(), nq = q.members.size();
  if (np == 0 || nq == 0) throw std::invalid_argument("empty population");
  if (np > size_cap || nq > size_cap)
    throw std::invalid_argument("population exceeds exact-transport size cap");
  if (np == nq) {
    std::vector<std::vector<double>> cost(np, std::vector<double>(nq));
    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t j = 0; j < nq; ++j)
        cost[i][j] = tv_distance(p.members[i], q.members[j]);
    return solve_assignment(cost).cost / static_cast<double>(np);
  }
  std::vector<double> supply(np, 1.0 / static_cast<double>(np));
  std::vector<double> demand(nq, 1.0 / static_cast<double>(nq));
  std::vector<std::vector<double>> cost(np, std::vector<double>(nq));
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < nq; ++j)
      cost[i][j] = tv_distance(p.members[i], q.members[j]);
  return solve_transport(supply, demand, cost);
}

}  // namespace fgl
