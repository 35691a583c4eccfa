#include "das/additive.hpp"

#include "das/error.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace das::additive {

namespace {

constexpr double kRidge = 1e-8;

double quantile(std::vector<double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

}  // namespace

SplineBasis::SplineBasis(const Eigen::Ref<const Eigen::VectorXd>& sample, int size) {
  if (size < kDegree + 1) throw ValidationError("spline basis needs at least 4 functions");
  if (sample.size() < 2) throw InsufficientSamples("spline basis needs at least 2 points");
  std::vector<double> sorted(sample.data(), sample.data() + sample.size());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  double hi = sorted.back();
  if (!(hi > lo)) hi = lo + 1.0;

  const int interior = size - kDegree - 1;
  std::vector<double> inner;
  for (int k = 1; k <= interior; ++k) {
    const double q = quantile(sorted, static_cast<double>(k) / (interior + 1));
    if (q > lo && q < hi && (inner.empty() || q > inner.back())) inner.push_back(q);
  }

  knots_.assign(kDegree + 1, lo);
  knots_.insert(knots_.end(), inner.begin(), inner.end());
  knots_.insert(knots_.end(), kDegree + 1, hi);
}

Eigen::MatrixXd SplineBasis::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const int m = size();
  const auto& t = knots_;
  const double lo = t.front();
  const double hi = t.back();
  const int last_span = static_cast<int>(t.size()) - kDegree - 2;

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.size(), m);
  std::vector<double> b(kDegree + 1);
  for (Eigen::Index r = 0; r < x.size(); ++r) {
    const double v = std::clamp(x[r], lo, hi);
    // Knot span mu with t[mu] <= v < t[mu + 1]; the right end belongs to the last span.
    int mu = kDegree;
    while (mu < last_span && v >= t[static_cast<std::size_t>(mu + 1)]) ++mu;

    // Cox-de Boor on the non-zero functions B_{mu-degree..mu}.
    std::fill(b.begin(), b.end(), 0.0);
    b[kDegree] = 1.0;
    for (int k = 1; k <= kDegree; ++k) {
      for (int i = kDegree - k; i <= kDegree; ++i) {
        const int idx = mu - kDegree + i;
        double value = 0.0;
        const double left_den = t[static_cast<std::size_t>(idx + k)] - t[static_cast<std::size_t>(idx)];
        if (left_den > 0.0) value += (v - t[static_cast<std::size_t>(idx)]) / left_den * b[static_cast<std::size_t>(i)];
        if (i < kDegree) {
          const double right_den = t[static_cast<std::size_t>(idx + k + 1)] - t[static_cast<std::size_t>(idx + 1)];
          if (right_den > 0.0)
            value += (t[static_cast<std::size_t>(idx + k + 1)] - v) / right_den * b[static_cast<std::size_t>(i + 1)];
        }
        b[static_cast<std::size_t>(i)] = value;
      }
    }
    for (int i = 0; i <= kDegree; ++i) out(r, mu - kDegree + i) = b[static_cast<std::size_t>(i)];
  }
  return out;
}

Eigen::MatrixXd covariate_block(const Eigen::Ref<const Eigen::VectorXd>& x, int size) {
  const SplineBasis basis(x, size);
  Eigen::MatrixXd block = basis.evaluate(x).leftCols(basis.size() - 1);
  block.rowwise() -= block.colwise().mean();
  return block;
}

NormalEquations::NormalEquations(Eigen::MatrixXd design, Eigen::VectorXd y)
    : design_(std::move(design)), y_(std::move(y)) {
  if (design_.rows() != y_.size()) throw DimensionMismatch("design rows and response length differ");
  gram_ = design_.transpose() * design_;
  moment_ = design_.transpose() * y_;
}

LeastSquaresFit NormalEquations::fit(const std::vector<Eigen::Index>& columns) const {
  LeastSquaresFit out;
  const auto p = static_cast<Eigen::Index>(columns.size());
  out.dof = static_cast<double>(rows() - p);
  if (p == 0) {
    out.rss = y_.squaredNorm();
    return out;
  }

  const Eigen::MatrixXd g = gram_(columns, columns);
  const Eigen::VectorXd rhs = moment_(columns);
  const double scale = std::max(g.diagonal().maxCoeff(), 1e-300);

  for (double ridge = kRidge; ridge <= 1e-2; ridge *= 1e3) {
    Eigen::MatrixXd system = g;
    system.diagonal().array() += ridge * scale;
    const Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() == Eigen::Success) {
      out.coefficients = llt.solve(rhs);
      if (out.coefficients.allFinite()) {
        out.rss = (y_ - design_(Eigen::all, columns) * out.coefficients).squaredNorm();
        return out;
      }
    }
    out.stabilized = true;
  }
  throw NumericalFailure("singular additive design");
}

}  // namespace das::additive
