#pragma once

#include <Eigen/Dense>

namespace ppsync {

/// Weighted communication digraph with leader pinning gains.
///
/// Edge convention: adjacency(i, j) > 0 means node i receives information
/// from node j (an edge j -> i). pinning(i) > 0 means node i observes the
/// leader directly. Immutable once constructed.
class Digraph {
 public:
  /// Throws InvalidArgument on a non-square adjacency, a pinning vector of the
  /// wrong length, negative weights, or nonzero self loops.
  Digraph(Eigen::MatrixXd adjacency, Eigen::VectorXd pinning);

  int size() const { return static_cast<int>(adjacency_.rows()); }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  const Eigen::VectorXd& pinning() const { return pinning_; }
  bool has_pinning() const { return (pinning_.array() > 0.0).any(); }

 private:
  Eigen::MatrixXd adjacency_;
  Eigen::VectorXd pinning_;
};

struct GraphMatrices {
  Eigen::MatrixXd laplacian;       // L = D - A
  Eigen::MatrixXd in_degree;       // D
  Eigen::MatrixXd pinning_matrix;  // B
  Eigen::MatrixXd lb;              // L + B
  Eigen::VectorXd q;               // (L + B)^{-1} 1
  Eigen::MatrixXd p_matrix;        // diag(1 / q_i)
  Eigen::MatrixXd q_matrix;        // P (L + B) + (L + B)^T P
  double condition = 0.0;          // 2-norm condition number of L + B
  double sigma_min = 0.0;          // smallest singular value of L + B

  int size() const { return static_cast<int>(lb.rows()); }
  Eigen::VectorXd p() const { return p_matrix.diagonal(); }
  double d_plus_b(int i) const { return lb(i, i); }
};

inline constexpr double kConditionLimit = 1e12;

/// Throws NoPinning when every pinning gain is zero and SingularSystem when
/// the condition number of L + B exceeds `condition_limit`.
GraphMatrices build_matrices(const Digraph& g, double condition_limit = kConditionLimit);

/// Exact reachability check (forward and reverse BFS from node 0).
bool is_strongly_connected(const Digraph& g);

/// P R (L + B) + (L + B)^T R P for a positive diagonal R given by `r_diag`.
Eigen::MatrixXd weighted_q_matrix(const GraphMatrices& gm, const Eigen::VectorXd& r_diag);

/// e = ((L + B) kron I_m)(x - 1 kron x0), with x stacked agent-major.
Eigen::VectorXd global_error(const GraphMatrices& gm, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& x0);

/// ||e|| / sigma_min(L + B): upper bound on ||x - 1 kron x0||.
double tracking_error_bound(const GraphMatrices& gm, const Eigen::VectorXd& e);

/// Five-node bidirectional ring with unit weights, leader pinned to node 3.
Digraph example1_digraph();

}  // namespace ppsync
