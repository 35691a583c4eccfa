#include "das/synth.hpp"

#include "das/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace das {

namespace {

constexpr double kDegenerateSlope = 1e-3;
constexpr Index kProbeRows = 256;
constexpr int kMaxRedraws = 100;

Eigen::VectorXd gather(const Eigen::Ref<const Eigen::VectorXd>& x, const std::vector<Index>& idx) {
  Eigen::VectorXd out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = x[idx[k]];
  return out;
}

FunctionModel draw_random_features(std::vector<Index> parents, Index features, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const auto p = static_cast<Index>(parents.size());
  const double amp_scale = std::sqrt(2.0 / static_cast<double>(features));

  Eigen::MatrixXd probe(kProbeRows, p);
  for (Index attempt = 0; attempt < kMaxRedraws; ++attempt) {
    FunctionModel f;
    f.kind = FunctionModel::Kind::RandomFeatures;
    f.parents = parents;
    f.frequencies.resize(features, p);
    f.phases.resize(features);
    f.amplitudes.resize(features);
    for (Index m = 0; m < features; ++m) {
      for (Index k = 0; k < p; ++k) f.frequencies(m, k) = normal(rng);
      f.phases[m] = phase(rng);
      f.amplitudes[m] = amp_scale * normal(rng);
    }

    for (Index r = 0; r < kProbeRows; ++r)
      for (Index k = 0; k < p; ++k) probe(r, k) = normal(rng);
    Eigen::VectorXd max_slope = Eigen::VectorXd::Zero(p);
    for (Index r = 0; r < kProbeRows; ++r)
      max_slope = max_slope.cwiseMax(f.gradient(probe.row(r).transpose()).cwiseAbs());
    if (max_slope.minCoeff() >= kDegenerateSlope) return f;
  }
  throw NumericalFailure("could not draw a non-degenerate random-feature function");
}

FunctionModel draw_linear(std::vector<Index> parents, Rng& rng) {
  std::uniform_real_distribution<double> magnitude(0.5, 1.5);
  std::bernoulli_distribution sign(0.5);
  FunctionModel f;
  f.kind = FunctionModel::Kind::Linear;
  f.parents = std::move(parents);
  f.coefficients.resize(static_cast<Index>(f.parents.size()));
  for (Index k = 0; k < f.coefficients.size(); ++k) f.coefficients[k] = (sign(rng) ? 1.0 : -1.0) * magnitude(rng);
  return f;
}

}  // namespace

double FunctionModel::value(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Linear: return coefficients.dot(u);
    case Kind::RandomFeatures:
      return amplitudes.dot(((frequencies * u) + phases).array().cos().matrix());
  }
  return 0.0;
}

Eigen::VectorXd FunctionModel::gradient(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  switch (kind) {
    case Kind::Zero: return Eigen::VectorXd::Zero(u.size());
    case Kind::Linear: return coefficients;
    case Kind::RandomFeatures: {
      const Eigen::VectorXd s = ((frequencies * u) + phases).array().sin().matrix();
      return -frequencies.transpose() * amplitudes.cwiseProduct(s);
    }
  }
  return {};
}

Eigen::MatrixXd FunctionModel::hessian(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  if (kind != Kind::RandomFeatures) return Eigen::MatrixXd::Zero(u.size(), u.size());
  const Eigen::VectorXd c = ((frequencies * u) + phases).array().cos().matrix();
  return -frequencies.transpose() * amplitudes.cwiseProduct(c).asDiagonal() * frequencies;
}

Eigen::VectorXd FunctionModel::evaluate(const Eigen::Ref<const Eigen::MatrixXd>& u) const {
  switch (kind) {
    case Kind::Zero: return Eigen::VectorXd::Zero(u.rows());
    case Kind::Linear: return u * coefficients;
    case Kind::RandomFeatures: {
      Eigen::MatrixXd z = u * frequencies.transpose();
      z.rowwise() += phases.transpose();
      return z.array().cos().matrix() * amplitudes;
    }
  }
  return {};
}

void ScmSpec::validate() const {
  const Index d = size();
  if (static_cast<Index>(functions.size()) != d || sigmas.size() != d)
    throw DimensionMismatch("SCM has " + std::to_string(d) + " nodes but " + std::to_string(functions.size()) +
                            " functions and " + std::to_string(sigmas.size()) + " noise scales");
  for (Index i = 0; i < d; ++i) {
    if (!(sigmas[i] > 0.0) || !std::isfinite(sigmas[i]))
      throw ValidationError("noise scale of node " + std::to_string(i) + " must be positive");
    const auto& f = functions[static_cast<std::size_t>(i)];
    if (f.parents != dag.parents(i))
      throw ValidationError("function parents of node " + std::to_string(i) + " do not match the graph");
    if (f.parents.empty() != (f.kind == FunctionModel::Kind::Zero))
      throw ValidationError("node " + std::to_string(i) + ": zero function iff no parents");
    const auto p = static_cast<Index>(f.parents.size());
    if (f.kind == FunctionModel::Kind::RandomFeatures &&
        (f.frequencies.cols() != p || f.frequencies.rows() != f.phases.size() ||
         f.phases.size() != f.amplitudes.size()))
      throw DimensionMismatch("random-feature shapes of node " + std::to_string(i));
    if (f.kind == FunctionModel::Kind::Linear && f.coefficients.size() != p)
      throw DimensionMismatch("linear coefficients of node " + std::to_string(i));
  }
}

Dataset::Dataset(Eigen::MatrixXd v, std::vector<std::string> column_names, DatasetMeta m)
    : values(std::move(v)), names(std::move(column_names)), meta(std::move(m)) {
  if (values.rows() < 2) throw InsufficientSamples("a dataset needs at least 2 rows, got " + std::to_string(values.rows()));
  if (names.empty()) {
    names.reserve(static_cast<std::size_t>(values.cols()));
    for (Index j = 0; j < values.cols(); ++j) names.push_back("X" + std::to_string(j));
  }
  if (static_cast<Index>(names.size()) != values.cols())
    throw DimensionMismatch(std::to_string(names.size()) + " column names for " + std::to_string(values.cols()) +
                            " columns");
  for (Index j = 0; j < values.cols(); ++j)
    for (Index i = 0; i < values.rows(); ++i)
      if (!std::isfinite(values(i, j)))
        throw ValidationError("non-finite value at row " + std::to_string(i) + ", column " + std::to_string(j));
}

ScmSpec sample_scm(const Dag& dag, const ScmOptions& options, Rng& rng) {
  if (!(options.sigma_lo > 0.0) || options.sigma_hi < options.sigma_lo)
    throw ValidationError("sigma range must satisfy 0 < lo <= hi");
  if (options.features < 1) throw ValidationError("random-feature count must be >= 1");

  ScmSpec scm;
  scm.dag = dag;
  scm.mode = options.mode;
  const Index d = dag.size();
  scm.sigmas.resize(d);
  std::uniform_real_distribution<double> sigma(options.sigma_lo, options.sigma_hi);
  for (Index i = 0; i < d; ++i) {
    auto parents = dag.parents(i);
    if (parents.empty()) {
      scm.functions.emplace_back();
    } else if (options.mode == ScmMode::Linear) {
      scm.functions.push_back(draw_linear(std::move(parents), rng));
    } else {
      scm.functions.push_back(draw_random_features(std::move(parents), options.features, rng));
    }
    scm.sigmas[i] = options.sigma_lo == options.sigma_hi ? options.sigma_lo : sigma(rng);
  }
  return scm;
}

Dataset draw(const ScmSpec& scm, Index n, Rng& rng) {
  if (n < 2) throw InsufficientSamples("draw needs n >= 2");
  scm.validate();
  const Index d = scm.size();
  Eigen::MatrixXd x(n, d);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Ordering order = topological_sort(scm.dag);
  for (Index node : order.nodes()) {
    const auto& f = scm.functions[static_cast<std::size_t>(node)];
    Eigen::VectorXd col = f.evaluate(x(Eigen::all, f.parents));
    for (Index r = 0; r < n; ++r) col[r] += scm.sigmas[node] * normal(rng);
    x.col(node) = col;
  }
  return Dataset(std::move(x), {}, DatasetMeta{0, scm.mode == ScmMode::Linear ? "linear" : "nonlinear", false});
}

Dataset standardize(const Dataset& data) {
  Eigen::MatrixXd v = data.values;
  const auto n = static_cast<double>(v.rows());
  for (Index j = 0; j < v.cols(); ++j) {
    const double mean = v.col(j).mean();
    v.col(j).array() -= mean;
    const double sd = std::sqrt(v.col(j).squaredNorm() / (n - 1.0));
    if (!(sd > 0.0)) throw ValidationError("column " + data.names[static_cast<std::size_t>(j)] + " is constant");
    v.col(j) /= sd;
  }
  DatasetMeta meta = data.meta;
  meta.standardized = true;
  return Dataset(std::move(v), data.names, meta);
}

Eigen::VectorXd residuals(const ScmSpec& scm, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Index d = scm.size();
  Eigen::VectorXd r(d);
  for (Index i = 0; i < d; ++i) {
    const auto& f = scm.functions[static_cast<std::size_t>(i)];
    r[i] = x[i] - f.value(gather(x, f.parents));
  }
  return r;
}

double log_density(const ScmSpec& scm, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::VectorXd r = residuals(scm, x);
  const Eigen::ArrayXd var = scm.sigmas.array().square();
  return (-0.5 * r.array().square() / var - 0.5 * (2.0 * std::numbers::pi * var).log()).sum();
}

// With r_i = x_i - f_i(pa_i), log p = -sum_i r_i^2 / (2 sigma_i^2) + const, so
//   s = -sum_i (r_i / sigma_i^2) grad r_i,
//   J = -sum_i (grad r_i grad r_i^T - r_i hess f_i) / sigma_i^2.
Eigen::VectorXd analytic_score(const ScmSpec& scm, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Index d = scm.size();
  const Eigen::VectorXd r = residuals(scm, x);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
  for (Index i = 0; i < d; ++i) {
    const auto& f = scm.functions[static_cast<std::size_t>(i)];
    const double w = r[i] / (scm.sigmas[i] * scm.sigmas[i]);
    s[i] -= w;
    if (f.parents.empty()) continue;
    const Eigen::VectorXd g = f.gradient(gather(x, f.parents));
    for (std::size_t k = 0; k < f.parents.size(); ++k) s[f.parents[k]] += w * g[static_cast<Index>(k)];
  }
  return s;
}

Eigen::MatrixXd analytic_score_jacobian(const ScmSpec& scm, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Index d = scm.size();
  const Eigen::VectorXd r = residuals(scm, x);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    const auto& f = scm.functions[static_cast<std::size_t>(i)];
    const double inv_var = 1.0 / (scm.sigmas[i] * scm.sigmas[i]);

    // grad r_i restricted to {i} U pa_i.
    std::vector<Index> support = f.parents;
    support.push_back(i);
    Eigen::VectorXd grad(static_cast<Index>(support.size()));
    grad.setZero();
    grad[grad.size() - 1] = 1.0;
    Eigen::MatrixXd second;
    if (!f.parents.empty()) {
      const Eigen::VectorXd u = gather(x, f.parents);
      grad.head(static_cast<Index>(f.parents.size())) = -f.gradient(u);
      second = f.hessian(u);
    }
    for (std::size_t a = 0; a < support.size(); ++a)
      for (std::size_t b = 0; b < support.size(); ++b)
        jac(support[a], support[b]) -= inv_var * grad[static_cast<Index>(a)] * grad[static_cast<Index>(b)];
    for (std::size_t a = 0; a < f.parents.size(); ++a)
      for (std::size_t b = 0; b < f.parents.size(); ++b)
        jac(f.parents[a], f.parents[b]) += inv_var * r[i] * second(static_cast<Index>(a), static_cast<Index>(b));
  }
  return jac;
}

}  // namespace das
