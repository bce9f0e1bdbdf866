#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "infercost/error.hpp"

namespace infercost {

template <typename Scalar>
using DesignMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Fits whose column-scaled design has a 2-norm condition number above this
/// are rejected as RankDeficient.
inline constexpr double kDefaultConditionThreshold = 1e12;

template <typename Scalar>
struct FitResult {
  Vector<Scalar> coefficients;  ///< in the column order of the design
  /// 1 - SSR/SST against the mean-only model. Negative when the fit is worse
  /// than the mean; -inf when y is constant but not reproduced exactly.
  Scalar r_squared{};
  Scalar residual_norm{};
  /// Condition number of the column-scaled design.
  Scalar condition_estimate{};
};

template <typename Scalar>
struct ScaledDesign {
  DesignMatrix<Scalar> matrix;
  Vector<Scalar> scales;
};

/// Divides each column by its largest absolute entry.
template <typename Derived>
ScaledDesign<typename Derived::Scalar> column_scale(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  ScaledDesign<Scalar> out;
  out.scales = x.cwiseAbs().colwise().maxCoeff().transpose();
  for (Eigen::Index j = 0; j < out.scales.size(); ++j) {
    if (!(out.scales[j] > Scalar(0))) {
      throw Error(Errc::ZeroColumn, "design column " + std::to_string(j) + " is identically zero");
    }
  }
  out.matrix = x * out.scales.cwiseInverse().asDiagonal();
  return out;
}

/// Maps coefficients fitted on a column-scaled design back to the original
/// columns.
template <typename DerivedC, typename DerivedS>
Vector<typename DerivedC::Scalar> unscale(const Eigen::MatrixBase<DerivedC>& coefficients,
                                          const Eigen::MatrixBase<DerivedS>& scales) {
  return coefficients.cwiseQuotient(scales);
}

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw Error(Errc::NonFinite, std::string(what) + " contains non-finite values");
}

}  // namespace detail

/// Ordinary least squares via column-pivoted Householder QR on the
/// column-scaled design. Deterministic for identical inputs.
template <typename DerivedX, typename DerivedY>
FitResult<typename DerivedX::Scalar> ols_fit(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                                             double condition_threshold = kDefaultConditionThreshold) {
  using Scalar = typename DerivedX::Scalar;
  const auto rows = x.rows();
  const auto cols = x.cols();
  if (cols < 1 || rows < cols) {
    throw Error(Errc::DimensionMismatch, "design is " + std::to_string(rows) + "x" + std::to_string(cols) +
                                             ", need rows >= cols >= 1");
  }
  if (y.size() != rows) {
    throw Error(Errc::DimensionMismatch,
                "response has " + std::to_string(y.size()) + " entries, design has " + std::to_string(rows) + " rows");
  }
  detail::require_finite(x, "design matrix");
  detail::require_finite(y, "response");

  ScaledDesign<Scalar> scaled;
  try {
    scaled = column_scale(x);
  } catch (const Error& e) {
    throw Error(Errc::RankDeficient, e.what());
  }

  const Eigen::JacobiSVD<DesignMatrix<Scalar>> svd(scaled.matrix);
  const auto& sv = svd.singularValues();
  const Scalar smallest = sv[sv.size() - 1];
  const Scalar condition = smallest > Scalar(0) ? sv[0] / smallest : std::numeric_limits<Scalar>::infinity();
  if (!(condition <= Scalar(condition_threshold))) {
    throw Error(Errc::RankDeficient, "condition estimate " + std::to_string(static_cast<double>(condition)) +
                                         " exceeds threshold " + std::to_string(condition_threshold));
  }

  const Vector<Scalar> yv = y;
  const Vector<Scalar> scaled_coeffs = scaled.matrix.colPivHouseholderQr().solve(yv);

  FitResult<Scalar> fit;
  fit.coefficients = unscale(scaled_coeffs, scaled.scales);
  fit.condition_estimate = condition;

  const Vector<Scalar> residual = yv - scaled.matrix * scaled_coeffs;
  fit.residual_norm = residual.norm();
  const Scalar ssr = residual.squaredNorm();
  const Scalar sst = (yv.array() - yv.mean()).matrix().squaredNorm();
  if (sst > Scalar(0)) {
    fit.r_squared = Scalar(1) - ssr / sst;
  } else {
    fit.r_squared = ssr == Scalar(0) ? Scalar(1) : -std::numeric_limits<Scalar>::infinity();
  }
  return fit;
}

}  // namespace infercost
