#pragma once

#include "das/graph.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace das {

enum class ScmMode { Nonlinear, Linear };

/// Structural function of one node over its parent coordinates.
///
/// Nonlinear nodes use a random-feature expansion
///   f(u) = sum_m a_m cos(<w_m, u> + b_m),
/// which approximates a draw from a unit-bandwidth RBF Gaussian process and
/// has closed-form first and second derivatives. Linear nodes use
/// f(u) = <c, u>. Source nodes carry the zero function.
struct FunctionModel {
  enum class Kind { Zero, RandomFeatures, Linear };

  Kind kind = Kind::Zero;
  std::vector<Index> parents;
  Eigen::MatrixXd frequencies;   // features x parents
  Eigen::VectorXd phases;        // features
  Eigen::VectorXd amplitudes;    // features
  Eigen::VectorXd coefficients;  // parents (linear only)

  /// Argument vectors are indexed by parent position, not node id.
  double value(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  Eigen::MatrixXd hessian(const Eigen::Ref<const Eigen::VectorXd>& u) const;

  /// Row-wise evaluation over a matrix of parent values (n x parents).
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& u) const;
};

struct ScmSpec {
  Dag dag;
  ScmMode mode = ScmMode::Nonlinear;
  std::vector<FunctionModel> functions;
  Eigen::VectorXd sigmas;

  Index size() const noexcept { return dag.size(); }
  /// Throws ValidationError when the invariants do not hold.
  void validate() const;
};

struct DatasetMeta {
  std::uint64_t seed = 0;
  std::string generator;
  bool standardized = false;
};

/// n x d observation matrix, one named column per node.
struct Dataset {
  Eigen::MatrixXd values;
  std::vector<std::string> names;
  DatasetMeta meta;

  Dataset() = default;
  /// Validates finiteness and n >= 2; names default to X0..X{d-1}.
  explicit Dataset(Eigen::MatrixXd v, std::vector<std::string> column_names = {}, DatasetMeta m = {});

  Index n() const noexcept { return values.rows(); }
  Index d() const noexcept { return values.cols(); }
};

struct ScmOptions {
  ScmMode mode = ScmMode::Nonlinear;
  double sigma_lo = 0.4;
  double sigma_hi = 0.8;
  Index features = 64;
};

ScmSpec sample_scm(const Dag& dag, const ScmOptions& options, Rng& rng);

/// Ancestral sampling of n rows.
Dataset draw(const ScmSpec& scm, Index n, Rng& rng);

/// Per-column centring and scaling to unit (unbiased) variance.
Dataset standardize(const Dataset& data);

/// Residuals x_i - f_i(pa_i(x)) for every node.
Eigen::VectorXd residuals(const ScmSpec& scm, const Eigen::Ref<const Eigen::VectorXd>& x);

double log_density(const ScmSpec& scm, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Exact gradient of the log-density.
Eigen::VectorXd analytic_score(const ScmSpec& scm, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Exact Jacobian of analytic_score; entry (j, k) is d s_j / d x_k.
Eigen::MatrixXd analytic_score_jacobian(const ScmSpec& scm, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace das
