#pragma once

#include "gpdiag/basis.hpp"
#include "gpdiag/dataset.hpp"

#include <Eigen/Dense>

#include <string>

namespace gpdiag {

struct ResidualProjection {
  Eigen::VectorXd y_star;  // (I - P_X) y
  int projector_rank = 0;
  std::string design_ref;
};

/// Residuals from regressing y on the design, through a Householder QR of X.
ResidualProjection residualize(const Eigen::VectorXd& y, const DesignMatrix& design);
ResidualProjection residualize(const Dataset& data, const DesignMatrix& design);

struct VReduction {
  Eigen::VectorXd v;       // projection of y
  Eigen::VectorXd v_star;  // projection of (I - P_X) y
  Eigen::VectorXd delta;   // v - v_star, the part of each v_j removed by the design
};

/// y is in observation order of the grid dataset.
VReduction v_reduction(const SpectralBasis& basis, const Dataset& grid_data, const DesignMatrix& design,
                       const Eigen::VectorXd& y);

std::string design_ref(const DesignMatrix& design);

}  // namespace gpdiag
