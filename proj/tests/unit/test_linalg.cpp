#include <doctest.h>

#include "ergmkit/error.hpp"
#include "ergmkit/linalg.hpp"

using namespace ergmkit;

TEST_CASE("spd inverse of a well-conditioned matrix") {
  Eigen::MatrixXd a(3, 3);
  a << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
  const Eigen::MatrixXd inv = spd_inverse(a, {"a", "b", "c"}, "test");
  CHECK((a * inv - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(SpdFactor(a).log_det() == doctest::Approx(std::log(a.determinant())));
  const Eigen::VectorXd b = Eigen::Vector3d(1, 2, 3);
  CHECK((a * spd_solve(a, b, {"a", "b", "c"}, "test") - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("singular matrices name the implicated parameters") {
  Eigen::MatrixXd a(3, 3);
  // Column c duplicates column a.
  a << 2, 0.3, 2, 0.3, 1, 0.3, 2, 0.3, 2;
  SpdFactor f(a);
  REQUIRE_FALSE(f.ok());
  CHECK(f.deficiency()->column == 2);
  CHECK(f.deficiency()->partner == 0);
  try {
    spd_inverse(a, {"x", "y", "z"}, "information");
    FAIL("expected SingularMatrixError");
  } catch (const SingularMatrixError& e) {
    const std::string what = e.what();
    CHECK(what.find("'z'") != std::string::npos);
    CHECK(what.find("'x'") != std::string::npos);
    CHECK(e.terms() == std::vector<std::string>{"x", "z"});
  }

  Eigen::MatrixXd zero_var = Eigen::MatrixXd::Identity(2, 2);
  zero_var(1, 1) = 0.0;
  CHECK_THROWS_AS(spd_inverse(zero_var, {"p", "q"}, "info"), SingularMatrixError);
}

TEST_CASE("relative pivot tolerance is scale-free") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2) * 1e-20;
  CHECK(SpdFactor(a).ok());
  a(1, 1) = 1e-35;
  CHECK_FALSE(SpdFactor(a).ok());
}
