#include "das/order.hpp"

#include "das/stats.hpp"

#include <algorithm>
#include <numeric>

namespace das {

OrderingResult OrderingResult::from_ordering(const Ordering& order) {
  OrderingResult r;
  r.ordering = order;
  const auto& nodes = order.nodes();
  r.removal.assign(nodes.rbegin(), nodes.rend());
  return r;
}

OrderingResult score_order(const Dataset& data, const SteinConfig& cfg) {
  const Index d = data.d();
  if (d < 1) throw ValidationError("cannot order an empty dataset");
  if (data.n() < 2) throw InsufficientSamples("ordering needs at least 2 rows");

  OrderingResult r;
  std::vector<Index> active(static_cast<std::size_t>(d));
  std::iota(active.begin(), active.end(), Index{0});

  while (active.size() > 1) {
    const SteinKernel<double> kernel(data.values(Eigen::all, active), cfg);
    const Eigen::MatrixXd diag = kernel.hessian_diag();
    Eigen::VectorXd var(diag.cols());
    for (Index k = 0; k < diag.cols(); ++k) var[k] = stats::variance(diag.col(k));

    // Ties go to the lowest node id; active stays sorted ascending.
    Index best = 0;
    for (Index k = 1; k < var.size(); ++k)
      if (var[k] < var[best]) best = k;

    if (r.diag_variances.empty()) r.degeneracy_ratio = var.maxCoeff() / std::max(var.minCoeff(), 1e-300);
    r.diag_variances.push_back(var);
    r.active.push_back(active);
    r.removal.push_back(active[static_cast<std::size_t>(best)]);
    active.erase(active.begin() + best);
  }
  // The last remaining node is a source; no estimate needed.
  r.removal.push_back(active.front());

  r.ordering = Ordering(std::vector<Index>(r.removal.rbegin(), r.removal.rend()));
  return r;
}

bool linear_degeneracy_diagnostic(const OrderingResult& result, double threshold) {
  return result.degeneracy_ratio < threshold;
}

}  // namespace das
