#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ergmkit {

inline constexpr double kPivotTolerance = 1e-12;

// Where a symmetric PSD matrix first loses rank, scanning columns in order.
// `column` is the first column whose Cholesky pivot falls below the relative
// tolerance; `partner` is the earlier column most correlated with it (-1 when
// the column has zero variance of its own).
struct RankDeficiency {
  int column = -1;
  int partner = -1;
};

// Cholesky factor of a symmetric PSD matrix, computed in the given column
// order so that a failure identifies the first dependent column.
class SpdFactor {
 public:
  explicit SpdFactor(const Eigen::MatrixXd& a, double tolerance = kPivotTolerance);

  bool ok() const noexcept { return !deficiency_; }
  const std::optional<RankDeficiency>& deficiency() const noexcept { return deficiency_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd inverse() const;
  double log_det() const;

 private:
  Eigen::MatrixXd lower_;
  std::optional<RankDeficiency> deficiency_;
};

// Inverse of a symmetric PSD matrix; throws SingularMatrixError naming the
// implicated labels when the matrix is numerically singular.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, const std::vector<std::string>& labels,
                            const std::string& context);
Eigen::VectorXd spd_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          const std::vector<std::string>& labels, const std::string& context);

// Message fragment "'a' and 'b'" (or "'a'") for a rank deficiency.
std::string describe_deficiency(const RankDeficiency& d, const std::vector<std::string>& labels);

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace ergmkit
