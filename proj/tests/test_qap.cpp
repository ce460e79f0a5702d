#include "support.hpp"

#include "shapegraph/assignment.hpp"
#include "shapegraph/errors.hpp"
#include "shapegraph/qap.hpp"

#include <doctest.h>

using namespace shapegraph;

TEST_CASE("linear assignment against enumeration") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + t % 6;
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = u(rng);
    const auto got = solve_assignment_min(c);
    double got_cost = 0.0;
    for (int i = 0; i < n; ++i) got_cost += c(i, static_cast<Eigen::Index>(got[i]));
    std::vector<size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    double best = 1e300;
    do {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += c(i, static_cast<Eigen::Index>(p[i]));
      best = std::min(best, s);
    } while (std::next_permutation(p.begin(), p.end()));
    CHECK(got_cost == doctest::Approx(best).epsilon(1e-12));
    const auto mx = solve_assignment_max(-c);
    double mx_cost = 0.0;
    for (int i = 0; i < n; ++i) mx_cost += c(i, static_cast<Eigen::Index>(mx[i]));
    CHECK(mx_cost == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("affinity matrix operations agree with the dense form") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const size_t n = 2 + static_cast<size_t>(t % 5);
    const AffinityMatrix k = testing::random_affinity(n, rng);
    const Eigen::MatrixXd d = k.dense();
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n * n));
    for (size_t a = 0; a < n; ++a) x(static_cast<Eigen::Index>(AffinityMatrix::slot(a, perm[a], n))) = 1.0;
    CHECK(k.score(perm) == doctest::Approx(x.dot(d * x)).epsilon(1e-12));
    Eigen::VectorXd y = Eigen::VectorXd::Random(static_cast<Eigen::Index>(n * n));
    CHECK((k.multiply(y) - d * y).cwiseAbs().maxCoeff() < 1e-12);
    for (size_t a = 0; a < n; ++a)
      for (size_t b = a + 1; b < n; ++b) {
        auto swapped = perm;
        std::swap(swapped[a], swapped[b]);
        CHECK(k.swap_delta(perm, a, b) == doctest::Approx(k.score(swapped) - k.score(perm)).epsilon(1e-12));
      }
    CHECK(k.row_sum_bound() >= d.cwiseAbs().rowwise().sum().maxCoeff() - 1e-12);
  }
}

TEST_CASE("qap_exact matches the brute-force oracle") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const size_t n = 1 + static_cast<size_t>(t % 6);
    const AffinityMatrix k = testing::random_affinity(n, rng);
    const QapResult r = qap_exact(k);
    CHECK(r.objective == doctest::Approx(testing::brute_force_qap(k)).epsilon(1e-12));
    CHECK(r.objective == doctest::Approx(k.score(r.permutation)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(qap_exact(testing::random_affinity(9, rng)), SizeError);
}

TEST_CASE("approximate solvers return valid permutations") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const size_t n = 1 + static_cast<size_t>(t % 7);
    const AffinityMatrix k = testing::random_affinity(n, rng);
    const double best = qap_exact(k).objective;
    for (const QapResult& r : {qap_spectral(k), qap_solve(k)}) {
      CHECK_NOTHROW(require_permutation(r.permutation, n));
      CHECK(r.objective == doctest::Approx(k.score(r.permutation)).epsilon(1e-12));
      CHECK(r.objective <= best + 1e-9);
    }
    if (n <= 4) CHECK(qap_solve(k).objective == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("local search never worsens its start") {
  std::mt19937_64 rng(5);
  const AffinityMatrix k = testing::random_affinity(7, rng);
  std::vector<size_t> start{6, 5, 4, 3, 2, 1, 0};
  CHECK(qap_local_search(k, start).objective >= k.score(start));
  CHECK_THROWS_AS(require_permutation(std::vector<size_t>{0, 0, 1}, 3), ArgumentError);
  CHECK_THROWS_AS(qap_local_search(k, {0, 1}), ArgumentError);
}

TEST_CASE("solver is deterministic for a seed") {
  std::mt19937_64 rng(6);
  const AffinityMatrix k = testing::random_affinity(12, rng);
  SolverOptions o;
  o.seed = 99;
  CHECK(qap_solve(k, o).permutation == qap_solve(k, o).permutation);
}
