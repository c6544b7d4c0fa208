#include "ergmkit/linalg.hpp"

#include <cmath>

#include "ergmkit/error.hpp"

namespace ergmkit {

SpdFactor::SpdFactor(const Eigen::MatrixXd& a, double tolerance) {
  const Eigen::Index p = a.rows();
  lower_ = Eigen::MatrixXd::Zero(p, p);
  double scale = p > 0 ? a.diagonal().cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index k = 0; k < p; ++k) {
    double pivot = a(k, k) - lower_.row(k).head(k).squaredNorm();
    // Relative to the column's own variance, and absolutely to the matrix scale.
    if (!(pivot > tolerance * a(k, k)) || !(pivot > tolerance * scale) || !std::isfinite(pivot)) {
      RankDeficiency d{static_cast<int>(k), -1};
      double best = -1.0;
      if (a(k, k) > 0) {
        for (Eigen::Index j = 0; j < k; ++j) {
          if (a(j, j) <= 0) continue;
          double r = std::abs(a(j, k)) / std::sqrt(a(j, j) * a(k, k));
          if (r > best + 1e-12) {
            best = r;
            d.partner = static_cast<int>(j);
          }
        }
      }
      deficiency_ = d;
      return;
    }
    double l = std::sqrt(pivot);
    lower_(k, k) = l;
    for (Eigen::Index i = k + 1; i < p; ++i) {
      lower_(i, k) = (a(i, k) - lower_.row(i).head(k).dot(lower_.row(k).head(k))) / l;
    }
  }
}

Eigen::VectorXd SpdFactor::solve(const Eigen::VectorXd& b) const {
  auto l = lower_.triangularView<Eigen::Lower>();
  return lower_.transpose().triangularView<Eigen::Upper>().solve(l.solve(b));
}

Eigen::MatrixXd SpdFactor::inverse() const {
  const Eigen::Index p = lower_.rows();
  auto l = lower_.triangularView<Eigen::Lower>();
  Eigen::MatrixXd inv =
      lower_.transpose().triangularView<Eigen::Upper>().solve(l.solve(Eigen::MatrixXd::Identity(p, p)));
  return symmetrize(inv);
}

double SpdFactor::log_det() const { return 2.0 * lower_.diagonal().array().log().sum(); }

std::string describe_deficiency(const RankDeficiency& d, const std::vector<std::string>& labels) {
  auto name = [&](int k) {
    return k >= 0 && k < static_cast<int>(labels.size()) ? "'" + labels[k] + "'"
                                                          : "#" + std::to_string(k);
  };
  if (d.partner < 0) return name(d.column);
  return name(d.partner) + " and " + name(d.column);
}

namespace {

[[noreturn]] void throw_singular(const RankDeficiency& d, const std::vector<std::string>& labels,
                                 const std::string& context) {
  std::vector<std::string> terms;
  if (d.partner >= 0 && d.partner < static_cast<int>(labels.size())) {
    terms.push_back(labels[d.partner]);
  }
  if (d.column < static_cast<int>(labels.size())) terms.push_back(labels[d.column]);
  std::string what = context + ": singular matrix; ";
  what += d.partner < 0 ? "zero variance for " + describe_deficiency(d, labels)
                        : "collinear columns " + describe_deficiency(d, labels);
  throw SingularMatrixError(what, std::move(terms));
}

}  // namespace

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, const std::vector<std::string>& labels,
                            const std::string& context) {
  SpdFactor f(symmetrize(a));
  if (!f.ok()) throw_singular(*f.deficiency(), labels, context);
  return f.inverse();
}

Eigen::VectorXd spd_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          const std::vector<std::string>& labels, const std::string& context) {
  SpdFactor f(symmetrize(a));
  if (!f.ok()) throw_singular(*f.deficiency(), labels, context);
  return f.solve(b);
}

}  // namespace ergmkit
