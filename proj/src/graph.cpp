#include "ppsync/graph.hpp"

#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "ppsync/error.hpp"

namespace ppsync {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NoPinning: return "NoPinning";
    case ErrorCode::NonPositiveR: return "NonPositiveR";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::BoundViolation: return "BoundViolation";
    case ErrorCode::SingularInputMatrix: return "SingularInputMatrix";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Digraph::Digraph(Eigen::MatrixXd adjacency, Eigen::VectorXd pinning)
    : adjacency_(std::move(adjacency)), pinning_(std::move(pinning)) {
  const auto n = adjacency_.rows();
  if (n == 0 || adjacency_.cols() != n)
    throw Error(ErrorCode::InvalidArgument, "adjacency must be a nonempty square matrix");
  if (pinning_.size() != n)
    throw Error(ErrorCode::InvalidArgument, "pinning length " + std::to_string(pinning_.size()) +
                                                " does not match " + std::to_string(n) + " nodes");
  if (!adjacency_.allFinite() || (adjacency_.array() < 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "adjacency weights must be finite and nonnegative");
  if (!pinning_.allFinite() || (pinning_.array() < 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "pinning gains must be finite and nonnegative");
  for (Eigen::Index i = 0; i < n; ++i)
    if (adjacency_(i, i) != 0.0)
      throw Error(ErrorCode::InvalidArgument, "self loop at node " + std::to_string(i + 1));
}

GraphMatrices build_matrices(const Digraph& g, double condition_limit) {
  if (!g.has_pinning()) throw Error(ErrorCode::NoPinning, "no node is pinned to the leader");

  GraphMatrices gm;
  const Eigen::MatrixXd& a = g.adjacency();
  gm.in_degree = a.rowwise().sum().asDiagonal();
  gm.laplacian = gm.in_degree - a;
  gm.pinning_matrix = g.pinning().asDiagonal();
  gm.lb = gm.laplacian + gm.pinning_matrix;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gm.lb);
  const auto& sv = svd.singularValues();
  gm.sigma_min = sv(sv.size() - 1);
  gm.condition = gm.sigma_min > 0.0 ? sv(0) / gm.sigma_min : std::numeric_limits<double>::infinity();
  if (!(gm.condition <= condition_limit))
    throw Error(ErrorCode::SingularSystem,
                "L + B condition number " + std::to_string(gm.condition) + " exceeds limit");

  gm.q = gm.lb.partialPivLu().solve(Eigen::VectorXd::Ones(g.size()));
  gm.p_matrix = gm.q.cwiseInverse().asDiagonal();
  gm.q_matrix = gm.p_matrix * gm.lb + gm.lb.transpose() * gm.p_matrix;
  return gm;
}

namespace {

// Nodes reachable from `start` following edges in the given direction.
int count_reachable(const Eigen::MatrixXd& a, bool reverse) {
  const auto n = a.rows();
  std::vector<bool> seen(n, false);
  std::queue<Eigen::Index> frontier;
  frontier.push(0);
  seen[0] = true;
  int count = 1;
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (Eigen::Index v = 0; v < n; ++v) {
      // a(v, u) > 0 is an edge u -> v.
      const double w = reverse ? a(u, v) : a(v, u);
      if (w > 0.0 && !seen[v]) {
        seen[v] = true;
        ++count;
        frontier.push(v);
      }
    }
  }
  return count;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) {
  const int n = g.size();
  return count_reachable(g.adjacency(), false) == n && count_reachable(g.adjacency(), true) == n;
}

Eigen::MatrixXd weighted_q_matrix(const GraphMatrices& gm, const Eigen::VectorXd& r_diag) {
  if (r_diag.size() != gm.size())
    throw Error(ErrorCode::DimensionMismatch, "R diagonal length does not match graph size");
  if ((r_diag.array() <= 0.0).any())
    throw Error(ErrorCode::NonPositiveR, "R must be positive definite");
  const Eigen::MatrixXd pr = (gm.p().cwiseProduct(r_diag)).asDiagonal();
  return pr * gm.lb + gm.lb.transpose() * pr;
}

Eigen::VectorXd global_error(const GraphMatrices& gm, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& x0) {
  const auto n = gm.size();
  const auto m = x0.size();
  if (m < 1 || x.size() != n * m)
    throw Error(ErrorCode::DimensionMismatch, "state length must equal agents x leader dimension");
  // (L+B) kron I_m applied to agent-major stacking is (L+B) acting on the
  // n x m matrix whose rows are agent states.
  Eigen::MatrixXd tilde = Eigen::Map<const Eigen::MatrixXd>(x.data(), m, n).transpose();
  tilde.rowwise() -= x0.transpose();
  Eigen::MatrixXd e = gm.lb * tilde;
  Eigen::MatrixXd et = e.transpose();
  return Eigen::Map<Eigen::VectorXd>(et.data(), n * m);
}

double tracking_error_bound(const GraphMatrices& gm, const Eigen::VectorXd& e) {
  return e.norm() / gm.sigma_min;
}

Digraph example1_digraph() {
  constexpr int n = 5;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a((i + 1) % n, i) = 1.0;  // i -> i+1
    a(i, (i + 1) % n) = 1.0;  // i+1 -> i
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(2) = 1.0;
  return Digraph(std::move(a), std::move(b));
}

}  // namespace ppsync
