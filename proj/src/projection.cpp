#include "gpdiag/projection.hpp"

#include "gpdiag/errors.hpp"

namespace gpdiag {

std::string design_ref(const DesignMatrix& design) {
  std::string out;
  for (const auto& n : design.names) out += (out.empty() ? "" : "+") + n;
  return out;
}

ResidualProjection residualize(const Eigen::VectorXd& y, const DesignMatrix& design) {
  const auto& X = design.X;
  if (X.rows() != y.size()) fail(ErrorKind::dimension, "design rows do not match outcome length");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) fail(ErrorKind::rank, "design matrix is rank deficient");
  // Q' y, zero the first p coordinates, then rotate back.
  Eigen::VectorXd t = qr.householderQ().transpose() * y;
  t.head(X.cols()).setZero();
  ResidualProjection r;
  r.y_star = qr.householderQ() * t;
  r.projector_rank = static_cast<int>(X.cols());
  r.design_ref = design_ref(design);
  return r;
}

ResidualProjection residualize(const Dataset& data, const DesignMatrix& design) {
  return residualize(data.y(), design);
}

VReduction v_reduction(const SpectralBasis& basis, const Dataset& grid_data, const DesignMatrix& design,
                       const Eigen::VectorXd& y) {
  if (!grid_data.is_grid()) fail(ErrorKind::precondition, "v_reduction requires grid data");
  VReduction out;
  out.v = project(basis, grid_data, y).v;
  out.v_star = project(basis, grid_data, residualize(y, design).y_star).v;
  out.delta = out.v - out.v_star;
  return out;
}

}  // namespace gpdiag
