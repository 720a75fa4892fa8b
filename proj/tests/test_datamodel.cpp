#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ebdiff/datamodel.hpp"
#include "ebdiff/errors.hpp"
#include "ebdiff/rng.hpp"

using namespace ebdiff;

TEST_CASE("sample_ground_truth") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto w = sample_ground_truth(1, seed);
    CHECK(std::abs(std::abs(w.w_star(0)) - 1.0) == 0.0);
  }
  auto a = sample_ground_truth(10, 42);
  CHECK(std::abs(a.w_star.norm() - 1.0) <= 1e-12);
  auto b = sample_ground_truth(10, 42);
  CHECK(a.w_star == b.w_star);
  CHECK_THROWS_AS(sample_ground_truth(0, 1), InvalidRange);
}

TEST_CASE("NodeProfile validation") {
  CHECK_NOTHROW(NodeProfile::isotropic(0.1, 3, 1.5, 0.01));
  CHECK_THROWS_AS(NodeProfile::isotropic(0.0, 3, 1.5, 0.01), InvalidRange);
  CHECK_THROWS_AS(NodeProfile::isotropic(0.1, 3, 1.5, -1.0), InvalidRange);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(NodeProfile(0.1, asym, 0.1), InvalidRange);
  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK_THROWS_AS(NodeProfile(0.1, indefinite, 0.1), InvalidRange);
}

TEST_CASE("sample_profiles") {
  CHECK(db_to_linear(-10.0) == doctest::Approx(0.1).epsilon(1e-15));

  auto flat = sample_profiles(5, 3, {1.0, 1.0}, {-20, -20}, 0.05, 9);
  for (const auto& p : flat) {
    CHECK(p.regressor_cov() == Matrix::Identity(3, 3));
    CHECK(p.noise_var() == doctest::Approx(0.01));
    CHECK(p.mu() == 0.05);
  }

  auto full = sample_profiles(60, 10, {1.0, 2.0}, {-25.0, -10.0}, 0.05, 3);
  REQUIRE(full.size() == 60);
  for (const auto& p : full) {
    const double s = p.regressor_cov()(0, 0);
    CHECK(s >= 1.0);
    CHECK(s <= 2.0);
    CHECK(p.regressor_cov().isApprox(s * Matrix::Identity(10, 10), 0.0));
    CHECK(p.noise_var() >= std::pow(10.0, -2.5));
    CHECK(p.noise_var() <= 0.1);
  }

  CHECK_THROWS_AS(sample_profiles(3, 2, {2.0, 1.0}, {-25, -10}, 0.05, 1), InvalidRange);
  CHECK_THROWS_AS(sample_profiles(3, 2, {1.0, 2.0}, {-10, -25}, 0.05, 1), InvalidRange);
  CHECK_THROWS_AS(sample_profiles(3, 2, {1.0, 2.0}, {-25, -10}, -0.05, 1), InvalidRange);
}

TEST_CASE("generate_sample: model identities") {
  auto truth = sample_ground_truth(4, 5);
  DataStream noiseless(1);
  auto p0 = NodeProfile::isotropic(0.1, 4, 1.3, 0.0);
  for (int t = 0; t < 100; ++t) {
    auto s = noiseless.next(p0, truth);
    CHECK(s.v == 0.0);
    CHECK(s.d == s.u.dot(truth.w_star));
  }

  GroundTruth zero{Vector::Zero(4)};
  DataStream stream(2);
  auto p = NodeProfile::isotropic(0.1, 4, 1.3, 0.2);
  for (int t = 0; t < 100; ++t) {
    auto s = stream.next(p, zero);
    CHECK(s.d == s.v);
  }
}

TEST_CASE("generate_sample: moments match the configured covariance") {
  const long T = 100000;
  SUBCASE("isotropic 1.5 I_2") {
    auto p = NodeProfile::isotropic(0.1, 2, 1.5, 0.1);
    GroundTruth truth{Vector::Zero(2)};
    DataStream stream(77);
    Vector mean = Vector::Zero(2);
    Matrix cov = Matrix::Zero(2, 2);
    double v2 = 0.0;
    for (long t = 0; t < T; ++t) {
      auto s = stream.next(p, truth);
      mean += s.u;
      cov += s.u * s.u.transpose();
      v2 += s.v * s.v;
    }
    mean /= T;
    cov /= T;
    const double lmax = 1.5;
    CHECK(mean.norm() <= 4.0 * std::sqrt(lmax * 2 / double(T)));
    CHECK((cov - p.regressor_cov()).cwiseAbs().maxCoeff() < 0.05);
    CHECK((cov - p.regressor_cov()).cwiseAbs().maxCoeff() < 5.0 * lmax / std::sqrt(double(T)));
    CHECK(v2 / T == doctest::Approx(0.1).epsilon(0.03));
  }
  SUBCASE("correlated covariance") {
    Matrix r(3, 3);
    r << 2.0, 0.5, 0.1, 0.5, 1.0, 0.2, 0.1, 0.2, 1.5;
    NodeProfile p(0.1, r, 0.05);
    GroundTruth truth{Vector::Zero(3)};
    DataStream stream(78);
    Matrix cov = Matrix::Zero(3, 3);
    for (long t = 0; t < T; ++t) {
      auto s = stream.next(p, truth);
      cov += s.u * s.u.transpose();
    }
    cov /= T;
    const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(r).eigenvalues().maxCoeff();
    CHECK((cov - r).cwiseAbs().maxCoeff() < 5.0 * lmax / std::sqrt(double(T)));
  }
}

TEST_CASE("streams: reproducible and distinct") {
  auto p = NodeProfile::isotropic(0.1, 3, 1.0, 0.1);
  auto truth = sample_ground_truth(3, 1);
  const auto r0 = replica_seed(1, 0);
  const auto r1 = replica_seed(1, 1);
  CHECK(r0 != r1);
  CHECK(node_stream_seed(r0, 0) != node_stream_seed(r0, 1));
  CHECK(node_stream_seed(r0, 0) != node_stream_seed(r1, 0));

  DataStream a(node_stream_seed(r0, 3)), b(node_stream_seed(r0, 3)), c(node_stream_seed(r1, 3));
  bool differs = false;
  for (int t = 0; t < 50; ++t) {
    auto sa = a.next(p, truth), sb = b.next(p, truth), sc = c.next(p, truth);
    CHECK(sa.u == sb.u);
    CHECK(sa.d == sb.d);
    differs |= sa.d != sc.d;
  }
  CHECK(differs);
}

TEST_CASE("write_profiles table") {
  std::vector<NodeProfile> ps{NodeProfile::isotropic(0.05, 2, 1.5, 0.01),
                              NodeProfile::isotropic(0.05, 2, 2.0, 0.1)};
  std::ostringstream os;
  write_profiles(os, ps);
  CHECK(os.str() == "node sigma2_u sigma2_v mu\n1 1.5 0.01 0.050000000000000003\n"
                    "2 2 0.10000000000000001 0.050000000000000003\n");
}
