#include "evodyn/diagnostics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace evodyn;

namespace {

Vector vec(std::initializer_list<double> w) {
  Vector v(static_cast<Index>(w.size()));
  Index i = 0;
  for (double x : w) v(i++) = x;
  return v;
}

StrategyGrid grid012(Index n = 201) { return make_uniform_grid(n, 0.0, 2.0); }

Index at(const StrategyGrid& g, double s) { return g.find(s, 1e-12).value(); }

// A state with support on a random subset and a payoff that is equal (and
// maximal) on that subset: a Nash pair by construction.
std::pair<DiscreteMeasure, PayoffVector> nash_pair(const StrategyGrid& g, std::mt19937_64& gen) {
  const Index n = g.size();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector w = Vector::Zero(n), rho(n);
  const double top = 2.0 * u(gen) - 1.0;
  for (Index i = 0; i < n; ++i) {
    if (u(gen) < 0.4 || i == 0) {
      w(i) = u(gen) + 0.05;
      rho(i) = top;
    } else {
      rho(i) = top - 0.01 - u(gen);
    }
  }
  w /= w.sum();
  return {DiscreteMeasure::probability(g, w), PayoffVector(g, rho)};
}

}  // namespace

TEST_CASE("nash_gap examples") {
  const auto g = grid012(9);
  const auto k = kernel_cosine(g);
  const auto third = DiscreteMeasure::probability(
      g, ((dirac(g, at(g, 0)) + dirac(g, at(g, 1)) + dirac(g, at(g, 2))).weights() / 3.0));
  CHECK(std::abs(nash_gap(third, evaluate_payoffs(k, third))) <= 1e-12);
  const auto half = dirac(g, at(g, 0.5));
  CHECK(nash_gap(half, evaluate_payoffs(k, half)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(nash_gap(random_measure(g, 3), PayoffVector(g, Vector::Constant(9, 4.0))) == doctest::Approx(0.0));
}

TEST_CASE("nash_check examples") {
  const auto g = grid012(9);
  const auto k = kernel_cosine(g);
  const auto ends = DiscreteMeasure::probability(g, (0.5 * dirac(g, 0) + 0.5 * dirac(g, 8)).weights());
  CHECK(nash_check(ends, evaluate_payoffs(k, ends), 1e-12).is_nash);
  const auto u = uniform_measure(g);
  const auto bad = nash_check(u, evaluate_payoffs(k, u), 1e-9);
  CHECK_FALSE(bad.is_nash);
  REQUIRE(bad.worst.has_value());
  CHECK(bad.worst->amount == doctest::Approx(2.0));
  CHECK(nash_check(random_measure(g, 1), PayoffVector(g, Vector::Constant(9, 1.0)), 0.0).is_nash);
}

TEST_CASE("storage and dissipation examples") {
  const auto g = make_uniform_grid(2, 0.0, 1.0);
  const auto lambda = make_uniform_reference(g);
  const auto x = DiscreteMeasure::probability(g, vec({0.5, 0.5}));
  const PayoffVector rho(g, vec({1, 0}));
  CHECK(bnn_storage(x, rho, lambda) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(bnn_storage(x, PayoffVector(g, vec({3, 3})), lambda) == 0.0);
  CHECK(dissipation_rate(RevisionProtocol::bnn(), x, rho, lambda) == doctest::Approx(0.03125).epsilon(1e-15));

  const auto e0 = dirac(g, 0);
  const PayoffVector up(g, vec({0, 1}));
  const auto tau = [](double r) { return r > 0 ? 0.5 * r * r : 0.0; };
  CHECK(pc_storage(e0, up, lambda, tau) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(storage(RevisionProtocol::smith(), e0, up, lambda) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(pc_storage(e0, PayoffVector(g, vec({2, 2})), lambda, tau) == 0.0);
  CHECK(dissipation_rate(RevisionProtocol::smith(), e0, up, lambda) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(dissipation_rate(RevisionProtocol::smith(), e0, PayoffVector(g, vec({1, 1})), lambda) == 0.0);
  CHECK_THROWS_AS(pc_storage(e0, up, lambda, {}), ValidationError);
  CHECK_THROWS_AS(storage(RevisionProtocol::impartial([](double r) { return r > 0 ? r : 0.0; }), e0, up, lambda),
                  ValidationError);
}

TEST_CASE("storage and supply agree with independent formulas") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto g = make_uniform_grid(15, 0.0, 2.0);
  const auto lambda = make_uniform_reference(g);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto mu = random_measure(g, s);
    Vector r(15);
    for (Index i = 0; i < 15; ++i) r(i) = u(gen);
    const PayoffVector rho(g, r);
    CHECK(storage(RevisionProtocol::bnn(), mu, rho, lambda) ==
          doctest::Approx(oracle::bnn_storage(mu.weights(), r, lambda.weights())).epsilon(1e-13));
    CHECK(storage(RevisionProtocol::smith(3.0), mu, rho, lambda) ==
          doctest::Approx(oracle::smith_storage(mu.weights(), r, 3.0 * lambda.weights())).epsilon(1e-13));
  }
  const auto g2 = make_uniform_grid(2, 0.0, 1.0);
  CHECK(supply_rate(DiscreteMeasure::zero(g2), PayoffVector(g2, vec({1, 5}))) == 0.0);
  CHECK(supply_rate(dirac(g2, 0) - dirac(g2, 1), PayoffVector(g2, vec({3, 3}))) == 0.0);
  CHECK(supply_rate(DiscreteMeasure::signed_measure(g2, vec({0.5, -0.5})), PayoffVector(g2, vec({1, 0}))) == 0.5);
}

TEST_CASE("closed_loop_supply") {
  const auto g = grid012(50);
  const auto cos_k = kernel_cosine(g);
  const auto war = kernel_continuous_war(1.0, ThetaSpec::logistic(100.0), g);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto v = random_measure(g, s) - random_measure(g, s + 40);
    CHECK(std::abs(closed_loop_supply(cos_k, v)) <= 1e-12);
    CHECK(closed_loop_supply(war, v) <= 1e-12);
  }
  const auto g2 = make_uniform_grid(2, 0.0, 1.0);
  CHECK(closed_loop_supply(kernel_table(g2, Matrix::Identity(2, 2)),
                           DiscreteMeasure::signed_measure(g2, vec({0.5, -0.5}))) == doctest::Approx(0.5));
}

TEST_CASE("energy identity: closed-form derivative against finite differences") {
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto g = make_uniform_grid(10, 0.0, 1.0);
  const auto lambda = make_uniform_reference(g);
  for (const auto& p : {RevisionProtocol::bnn(), RevisionProtocol::smith(), RevisionProtocol::power(3.0, 2.0)}) {
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto mu = random_measure(g, s);
      Vector r(10), e(10);
      for (Index i = 0; i < 10; ++i) {
        r(i) = u(gen);
        e(i) = u(gen);
      }
      const PayoffVector rho(g, r), eta(g, e);
      const auto rep = dissipativity_report(p, mu, rho, lambda, eta);
      CHECK(rep.storage >= 0.0);
      CHECK(rep.dissipation_sigma >= -1e-15);
      CHECK(std::abs(rep.slack) <= 1e-12);
      const auto v = mean_field(p, mu, rho, lambda);
      // Oracle: numerical derivative of the storage written independently.
      const double fd = oracle::derivative([&](double t) {
        const Vector m = mu.weights() + t * v.weights();
        const Vector q = r + t * e;
        if (p.kind() == RevisionProtocol::Kind::bnn)
          return oracle::bnn_storage(m, q, lambda.weights());
        if (p.kind() == RevisionProtocol::Kind::smith)
          return oracle::smith_storage(m, q, lambda.weights());
        double total = 0.0;
        for (Index i = 0; i < 10; ++i)
          for (Index j = 0; j < 10; ++j)
            total += m(i) * 2.0 * lambda[j] * std::pow(std::max(0.0, q(j) - q(i)), 4.0) / 4.0;
        return total;
      });
      CHECK(std::abs(rep.derivative - fd) <= 1e-7);
      CHECK(std::abs(rep.fd_derivative - rep.derivative) <= 1e-6);
    }
  }
}

TEST_CASE("strict passivity zero sets") {
  std::mt19937_64 gen(41);
  const auto g = make_uniform_grid(12, 0.0, 1.0);
  const auto lambda = make_uniform_reference(g);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int zeros = 0, nonzeros = 0;
  for (int t = 0; t < 400; ++t) {
    DiscreteMeasure mu = uniform_measure(g);
    PayoffVector rho(g, Vector::Zero(12));
    if (t % 2 == 0) {
      std::tie(mu, rho) = nash_pair(g, gen);
    } else {
      mu = random_measure(g, static_cast<std::uint64_t>(t));
      Vector r(12);
      for (Index i = 0; i < 12; ++i) r(i) = u(gen);
      rho = PayoffVector(g, r);
    }
    for (const auto& p : {RevisionProtocol::bnn(), RevisionProtocol::smith()}) {
      const double S = storage(p, mu, rho, lambda);
      const double field = tv_norm(mean_field(p, mu, rho, lambda));
      const double sigma = dissipation_rate(p, mu, rho, lambda);
      CHECK(S >= 0.0);
      CHECK(sigma >= -1e-15);
      const bool a = S <= 1e-12, b = field <= 1e-10, c = sigma <= 1e-12;
      CHECK(a == b);
      CHECK(b == c);
      (a ? zeros : nonzeros)++;
    }
  }
  CHECK(zeros == 400);
  CHECK(nonzeros == 400);
}

TEST_CASE("storage vanishes exactly at Nash states (both directions)") {
  std::mt19937_64 gen(43);
  const auto g = make_uniform_grid(8, 0.0, 1.0);
  const auto lambda = make_uniform_reference(g);
  for (int t = 0; t < 200; ++t) {
    auto [mu, rho] = nash_pair(g, gen);
    CHECK(nash_gap(mu, rho) <= 1e-12);
    CHECK(bnn_storage(mu, rho, lambda) <= 1e-24);
    const auto other = random_measure(g, static_cast<std::uint64_t>(t));
    CHECK(nash_gap(other, rho) > 1e-6);
    CHECK(bnn_storage(other, rho, lambda) > 0.0);
  }
}

TEST_CASE("Nash formulations agree") {
  std::mt19937_64 gen(47);
  const auto g = make_uniform_grid(10, 0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    DiscreteMeasure mu = uniform_measure(g);
    PayoffVector rho(g, Vector::Zero(10));
    if (t % 3 == 0) {
      std::tie(mu, rho) = nash_pair(g, gen);
    } else {
      std::tie(mu, rho) = nash_pair(g, gen);
      mu = random_measure(g, static_cast<std::uint64_t>(t));
    }
    const double tol = 1e-9;
    const bool by_gap = nash_gap(mu, rho) <= tol;
    const bool by_support = nash_check(mu, rho, tol + 1e-12, 0.0).is_nash;
    CHECK(by_gap == by_support);
  }
}

TEST_CASE("Nash equilibria of the cosine game form a convex set") {
  const auto g = grid012(201);
  const auto k = kernel_cosine(g);
  const std::vector<DiscreteMeasure> nash{dirac(g, at(g, 0)), dirac(g, at(g, 1)), dirac(g, at(g, 2))};
  for (const auto& n : nash) CHECK(nash_check(n, evaluate_payoffs(k, n), 1e-10).is_nash);
  std::mt19937_64 gen(53);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const double a = u(gen), b = u(gen), c = u(gen);
    const Vector w = (a * nash[0].weights() + b * nash[1].weights() + c * nash[2].weights()) / (a + b + c);
    const auto mix = DiscreteMeasure::probability(g, w);
    CHECK(nash_check(mix, evaluate_payoffs(k, mix), 1e-10).is_nash);
  }
}

TEST_CASE("storage trace along closed-loop runs") {
  const auto g = grid012(41);
  const auto lambda = make_uniform_reference(g);
  SimulationOptions o{5.0, 0.01, 5, Integrator::rk4};
  const auto war = kernel_continuous_war(1.0, ThetaSpec::logistic(100.0), g);
  const auto traj = simulate_edm(war, RevisionProtocol::bnn(41.0), lambda, gaussian_on_grid(g, 1.0, 0.1), o);
  const auto rep = storage_trace_check(traj, RevisionProtocol::bnn(41.0), war, lambda);
  CHECK(rep.max_increase <= 1e-6);

  const auto cos_k = kernel_cosine(g);
  const auto t2 = simulate_edm(cos_k, RevisionProtocol::smith(41.0), lambda, uniform_measure(g), o);
  CHECK(storage_trace_check(t2, RevisionProtocol::smith(41.0), cos_k, lambda).max_increase <= 1e-6);

  // Energy balance converges at second order in the sampling interval. At
  // unit rate the storage is smooth on the sampling scale.
  auto residual = [&](Index every) {
    SimulationOptions q{2.0, 0.005, every, Integrator::rk4};
    const auto tr = simulate_edm(war, RevisionProtocol::bnn(), lambda, gaussian_on_grid(g, 1.0, 0.1), q);
    return storage_trace_check(tr, RevisionProtocol::bnn(), war, lambda).energy_balance_residual;
  };
  const double coarse = residual(8), fine = residual(4);
  CHECK(fine <= 1e-6);
  CHECK(coarse / fine > 3.0);

  const auto ends = DiscreteMeasure::probability(g, (0.5 * dirac(g, 0) + 0.5 * dirac(g, 40)).weights());
  const auto rest = simulate_edm(cos_k, RevisionProtocol::smith(), lambda, ends, o);
  const auto rr = storage_trace_check(rest, RevisionProtocol::smith(), cos_k, lambda);
  CHECK(rr.max_increase <= 0.0);
  CHECK(rr.energy_balance_residual <= 1e-14);

  const auto g2 = make_uniform_grid(2, 0.0, 1.0);
  const auto id = kernel_table(g2, Matrix::Identity(2, 2));
  const auto t3 = simulate_edm(id, RevisionProtocol::bnn(), make_uniform_reference(g2), uniform_measure(g2), o);
  CHECK_THROWS_AS(storage_trace_check(t3, RevisionProtocol::bnn(), id, make_uniform_reference(g2)), ValidationError);
}

TEST_CASE("rest_point_check") {
  const auto g = grid012(9);
  const auto lambda = make_uniform_reference(g);
  const auto k = kernel_cosine(g);
  const auto ends = DiscreteMeasure::probability(g, (0.5 * dirac(g, 0) + 0.5 * dirac(g, 8)).weights());
  for (const auto& p : {RevisionProtocol::bnn(), RevisionProtocol::smith()}) {
    const auto yes = rest_point_check(ends, k, p, lambda, 1e-12);
    CHECK(yes.is_rest_point);
    CHECK(yes.nash);
    const auto no = rest_point_check(uniform_measure(g), k, p, lambda, 1e-12);
    CHECK_FALSE(no.is_rest_point);
    CHECK_FALSE(no.nash);
    const auto zero = rest_point_check(random_measure(g, 2), kernel_table(g, Matrix::Zero(9, 9)), p, lambda, 0.0);
    CHECK(zero.is_rest_point);
    CHECK(zero.nash);
  }
}

TEST_CASE("score_function") {
  const auto g = grid012(9);
  const auto k = kernel_cosine(g);
  const auto mu = random_measure(g, 1);
  for (double eta : {0.1, 0.5, 1.0}) CHECK(score_function(k, mu, mu, eta) == 0.0);
  const auto d0 = dirac(g, 0), dh = dirac(g, at(g, 0.5));
  for (double eta : {0.01, 0.3, 1.0}) CHECK(score_function(k, dh, d0, eta) == doctest::Approx(-2.0).epsilon(1e-14));
  const auto nu = random_measure(g, 2);
  const double limit = pairing(evaluate_payoffs(k, mu), nu) - pairing(evaluate_payoffs(k, mu), mu);
  CHECK(score_function(k, nu, mu, 1e-9) == doctest::Approx(limit).epsilon(1e-7));
  CHECK_THROWS_AS(score_function(k, nu, mu, 0.0), ValidationError);
  CHECK_THROWS_AS(score_function(k, nu, mu, 1.5), ValidationError);
}
