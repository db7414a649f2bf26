#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "veer/measures.hpp"

using namespace veer;

namespace {

// Independent oracle: largest real root by bisection on [lo, hi].
double largest_real_root(const std::vector<double>& poly, double lo, double hi) {
  auto eval = [&](double x) {
    double v = 0;
    for (double c : poly) v = v * x + c;
    return v;
  };
  for (int i = 0; i < 200; ++i) {
    double mid = (lo + hi) / 2;
    if (eval(lo) * eval(mid) <= 0)
      hi = mid;
    else
      lo = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace

TEST_CASE("torus transition matrix and Perron data") {
  auto tm = load_fixture("torus_s4.tt");
  auto M = transition_matrix(tm.track, tm.map);
  REQUIRE(M.size() == 2);
  int ia = 0, ib = 1;
  CHECK(M.m[ia][ia] == 2);
  CHECK(M.m[ia][ib] == 1);
  CHECK(M.m[ib][ia] == 1);
  CHECK(M.m[ib][ib] == 1);

  auto pd = perron(M);
  double golden = (3 + std::sqrt(5.0)) / 2;
  CHECK(pd.lambda == doctest::Approx(golden).epsilon(1e-12));
  CHECK(pd.residual < 1e-9);
  // weights (phi, 1) normalized to max 1
  double phi = (1 + std::sqrt(5.0)) / 2;
  CHECK(pd.weights[ia] == doctest::Approx(1.0));
  CHECK(pd.weights[ib] == doctest::Approx(1.0 / phi).epsilon(1e-10));
}

TEST_CASE("identity map gives identity matrix and fails perron") {
  auto tm = load_fixture("torus_s4.tt");
  GraphMap ident;
  ident.images = {{DirB::fwd(0)}, {DirB::fwd(1)}};
  auto M = transition_matrix(tm.track, ident);
  CHECK(M.m[0][0] == 1);
  CHECK(M.m[0][1] == 0);
  CHECK(M.m[1][0] == 0);
  CHECK(M.m[1][1] == 1);
  CHECK(!is_primitive(M));
  CHECK_THROWS(perron(M));
}

TEST_CASE("lambda(M) equals lambda(M transpose)") {
  auto tm = load_fixture("torus_s4.tt");
  auto M = transition_matrix(tm.track, tm.map);
  TransitionMatrix Mt = M;
  for (int i = 0; i < M.size(); ++i)
    for (int j = 0; j < M.size(); ++j) Mt.m[i][j] = M.m[j][i];
  CHECK(perron(M).lambda == doctest::Approx(perron(Mt).lambda).epsilon(1e-10));
}

TEST_CASE("perron normalization is deterministic") {
  auto tm = load_fixture("torus_s4.tt");
  auto M = transition_matrix(tm.track, tm.map);
  auto a = perron(M);
  auto b = perron(M);
  CHECK(a.weights == b.weights);
  double quartic_root = largest_real_root({1, -1, -1, -1, 1}, 1.0, 3.0);
  CHECK(quartic_root == doctest::Approx(1.7220838).epsilon(1e-6));  // oracle self-check
}
