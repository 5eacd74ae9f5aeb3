#include <doctest.h>

#include <random>

#include "geodec/metrics.hpp"

using namespace geodec;

TEST_CASE("unit identities") {
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(7, 1.0 / 7.0);
  Eigen::VectorXd one = Eigen::VectorXd::Zero(7);
  one(3) = 1.0;
  CHECK(std::abs(gini_g(uniform)) < 1e-12);
  CHECK(std::abs(gini_g(one) - 6.0 / 7.0) < 1e-12);
  CHECK(std::abs(hhi_g(uniform) - 1.0 / 7.0) < 1e-12);
  CHECK(std::abs(hhi_g(one) - 1.0) < 1e-12);
  CHECK(liveness_coefficient(uniform) == 3);
  CHECK(liveness_coefficient(one) == 1);
  CHECK(std::abs(cv_g(Eigen::VectorXd::Constant(5, 1.3))) < 1e-12);
}

TEST_CASE("worked values") {
  Eigen::VectorXd p(4);
  p << 0.5, 0.25, 0.25, 0.0;
  CHECK(gini_g(p) == doctest::Approx(0.375));
  CHECK(hhi_g(p) == doctest::Approx(0.375));
  CHECK(liveness_coefficient(p) == 1);
  Eigen::VectorXd w(2);
  w << 1.0, 3.0;
  CHECK(cv_g(w) == doctest::Approx(0.5));
  Eigen::VectorXd third(3);
  third << 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0;
  CHECK(liveness_coefficient(third) == 1);
}

TEST_CASE("cv needs a positive mean") {
  CHECK_THROWS_AS(cv_g(Eigen::VectorXd::Zero(3)), ZeroMean);
  CHECK_THROWS_AS(cv_g(Eigen::VectorXd()), ZeroMean);
}

TEST_CASE("sorted Gini matches the pairwise sum and metric bounds hold") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 40);
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::VectorXd p(size(rng));
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = u(rng) < 0.3 ? 0.0 : u(rng);
    if (p.sum() == 0.0) p(0) = 1.0;
    p /= p.sum();
    const double m = static_cast<double>(p.size());
    CHECK(std::abs(gini_g(p) - gini_g_pairwise(p)) < 1e-12);
    CHECK(gini_g(p) >= -1e-15);
    CHECK(gini_g(p) <= (m - 1.0) / m + 1e-12);
    CHECK(hhi_g(p) >= 1.0 / m - 1e-12);
    CHECK(hhi_g(p) <= 1.0 + 1e-12);
    CHECK(liveness_coefficient(p) >= 1);
    CHECK(liveness_coefficient(p) <= static_cast<std::size_t>(p.size()));
    // permutation invariance
    Eigen::VectorXd q = p.reverse();
    CHECK(gini_g(q) == doctest::Approx(gini_g(p)));
    CHECK(liveness_coefficient(q) == liveness_coefficient(p));
  }
}

TEST_CASE("metrics on expressions and other scalars") {
  Eigen::VectorXf f(3);
  f << 0.5f, 0.5f, 0.0f;
  CHECK(gini_g(f) == doctest::Approx(1.0f / 3.0f));
  Eigen::VectorXd a = Eigen::VectorXd::Constant(4, 1.0);
  CHECK(gini_g(a / a.sum()) == doctest::Approx(0.0));
  CHECK(hhi_g(a / 4.0) == doctest::Approx(0.25));
}

TEST_CASE("shares and snapshots") {
  RegionTable regions({{0, "us-east4", Macro::NorthAmerica},
                       {1, "us-west1", Macro::NorthAmerica},
                       {2, "europe-west1", Macro::Europe}});
  const std::vector<RegionId> where{0, 0, 1, 2};
  const auto by_region = shares_from_regions(where, regions, Granularity::GcpRegion);
  REQUIRE(by_region.size() == 3);
  CHECK(by_region(0) == doctest::Approx(0.5));
  CHECK(by_region.sum() == doctest::Approx(1.0));
  const auto by_macro = shares_from_regions(where, regions, Granularity::MacroRegion);
  REQUIRE(by_macro.size() == static_cast<Eigen::Index>(kMacroCount));
  CHECK(by_macro(static_cast<int>(Macro::NorthAmerica)) == doctest::Approx(0.75));

  Eigen::VectorXd payoffs(3);
  payoffs << 1.0, 1.0, 1.0;
  const auto snap = snapshot(4, by_region, payoffs);
  CHECK(snap.slot == 4);
  REQUIRE(snap.cv.has_value());
  CHECK(*snap.cv == doctest::Approx(0.0));
  CHECK(snap.lc == 1);
  CHECK_FALSE(snapshot(0, by_region, Eigen::VectorXd::Zero(3)).cv.has_value());
}
