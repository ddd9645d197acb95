#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <vector>

#include <json.hpp>

#include "sigscale/stat_tests.hpp"

using namespace sigscale::stats;

namespace {

DifferenceVector dv(std::vector<double> values) {
  return DifferenceVector(std::move(values));
}

ResamplingConfig cfg_with_seed(std::uint64_t seed) {
  ResamplingConfig cfg;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("paired t-test matches the hand-computed example") {
  // d = [1..5]: mean 3, sd sqrt(2.5), t = 3 / (sqrt(2.5)/sqrt(5))
  const TestResult r = t_test_paired(dv({1, 2, 3, 4, 5}));
  CHECK(r.statistic == doctest::Approx(4.242640687119285).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.013235599563682695).epsilon(1e-9));
  CHECK(r.method == Method::exact);
  CHECK(r.effective_n == 5);
}

TEST_CASE("t-test degenerate branches") {
  const TestResult zeros = t_test_paired(dv({0, 0, 0, 0}));
  CHECK(zeros.p_value == 1.0);
  CHECK(zeros.method == Method::degenerate);

  const TestResult constant = t_test_paired(dv({0.3, 0.3, 0.3}));
  CHECK(constant.p_value == 0.0);
  CHECK(constant.method == Method::degenerate);
}

TEST_CASE("bootstrap shift test boundary cases") {
  ResamplingConfig cfg = cfg_with_seed(17);

  SUBCASE("constant vector gets the smallest possible p") {
    const TestResult r = bootstrap_shift_test(dv(std::vector<double>(10, 0.1)), cfg);
    CHECK(r.p_value == doctest::Approx(1.0 / 10001.0).epsilon(1e-12));
    CHECK(r.resamples_used == 10000);
    CHECK(r.method == Method::monte_carlo);
  }
  SUBCASE("zero observed mean means p = 1") {
    const TestResult r = bootstrap_shift_test(dv({1.0, -1.0, 0.5, -0.5}), cfg);
    CHECK(r.p_value == 1.0);
  }
}

TEST_CASE("bootstrap agrees with an independent large-B oracle") {
  // Oracle: separate bootstrap implementation on std::mt19937_64 with
  // B = 200,000, compared at +-0.02.
  const std::vector<double> d = {1, -1, 2, -2, 3};
  const double mean = (1 - 1 + 2 - 2 + 3) / 5.0;
  std::vector<double> centered(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) centered[i] = d[i] - mean;

  std::mt19937_64 gen(99);
  std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
  const int oracle_b = 200000;
  int count = 0;
  // boundary-inclusive comparison: resample sums that equal n*|mean| in
  // exact arithmetic count, so tolerate the float rounding of the centering
  const double threshold = d.size() * std::abs(mean) - 1e-9;
  for (int b = 0; b < oracle_b; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) sum += centered[pick(gen)];
    if (std::abs(sum) >= threshold) ++count;
  }
  const double oracle_p = static_cast<double>(count + 1) / (oracle_b + 1);

  const TestResult r = bootstrap_shift_test(dv(d), cfg_with_seed(4));
  CHECK(std::abs(r.p_value - oracle_p) < 0.02);
}

TEST_CASE("randomization test enumerates small vectors exactly") {
  SUBCASE("two equal positive values") {
    // assignments ++, +-, -+, -- have means .1, 0, 0, -.1; two reach |.1|
    const TestResult r = randomization_test(dv({0.1, 0.1}), cfg_with_seed(0));
    CHECK(r.p_value == doctest::Approx(0.5));
    CHECK(r.method == Method::exact);
    CHECK(r.resamples_used == 4);
  }
  SUBCASE("all zeros keep p = 1") {
    const TestResult r = randomization_test(dv({0, 0, 0}), cfg_with_seed(0));
    CHECK(r.p_value == 1.0);
  }
}

TEST_CASE("exact randomization counts match brute-force enumeration") {
  // 100 random vectors, n <= 10, counted against a from-scratch oracle.
  std::mt19937_64 gen(123);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::uniform_int_distribution<int> size(2, 10);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = size(gen);
    std::vector<double> d(n);
    for (double& x : d) x = value(gen);

    double obs_sum = 0.0;
    double scale = 0.0;
    for (double x : d) {
      obs_sum += x;
      scale += std::abs(x);
    }
    const double threshold = std::abs(obs_sum) - 1e-9 * std::max(1.0, scale);
    std::uint64_t count = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        sum += (mask >> i) & 1 ? d[i] : -d[i];
      }
      if (std::abs(sum) >= threshold) ++count;
    }
    const double oracle_p =
        static_cast<double>(count) / static_cast<double>(std::uint64_t{1} << n);

    const TestResult r = randomization_test(dv(d), cfg_with_seed(0));
    REQUIRE(r.method == Method::exact);
    CHECK(r.p_value == doctest::Approx(oracle_p).epsilon(1e-12));
  }
}

TEST_CASE("sign test binomial tails") {
  SUBCASE("8 positives, 2 negatives") {
    // 2 * (45 + 10 + 1) / 1024
    const TestResult r =
        sign_test(dv({1, 1, 1, 1, 1, 1, 1, 1, -1, -1}));
    CHECK(r.p_value == doctest::Approx(0.109375).epsilon(1e-12));
    CHECK(r.statistic == 8.0);
    CHECK(r.effective_n == 10);
    CHECK(r.method == Method::exact);
  }
  SUBCASE("perfect balance caps at 1") {
    const TestResult r =
        sign_test(dv({1, 1, 1, 1, 1, -1, -1, -1, -1, -1}));
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("zeros are discarded before counting") {
    const TestResult r = sign_test(dv({1, 1, 1, -1, -1, -1, 0, 0, 0, 0}));
    CHECK(r.effective_n == 6);
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("all zeros is degenerate") {
    const TestResult r = sign_test(dv({0, 0, 0}));
    CHECK(r.p_value == 1.0);
    CHECK(r.method == Method::degenerate);
  }
}

namespace {

// Brute-force Wilcoxon oracle: enumerate all sign assignments of the ranks.
double wilcoxon_exact_bruteforce(const std::vector<double>& ranks, double w_obs) {
  const std::size_t m = ranks.size();
  const std::uint64_t total = std::uint64_t{1} << m;
  std::uint64_t below = 0;
  std::uint64_t above = 0;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if ((mask >> i) & 1) w += ranks[i];
    }
    if (w <= w_obs) ++below;
    if (w >= w_obs) ++above;
  }
  return std::min(1.0, 2.0 * static_cast<double>(std::min(below, above)) /
                           static_cast<double>(total));
}

}  // namespace

TEST_CASE("wilcoxon signed rank exact path") {
  SUBCASE("textbook four-point example") {
    // ranks of |d| are 1,2,3,4; positives carry 1+2+3 = 6
    const TestResult r = wilcoxon_signed_rank(dv({1, 2, 3, -4}), cfg_with_seed(0));
    CHECK(r.statistic == doctest::Approx(6.0));
    CHECK(r.p_value == doctest::Approx(0.875).epsilon(1e-12));
    CHECK(r.method == Method::exact);
    CHECK(r.resamples_used == 16);
  }
  SUBCASE("matches brute-force enumeration on random tie-free vectors") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> value(0.01, 1.0);
    std::uniform_int_distribution<int> size(3, 12);
    for (int rep = 0; rep < 50; ++rep) {
      const int n = size(gen);
      std::vector<double> d(n);
      for (double& x : d) x = value(gen) * (gen() % 2 ? 1.0 : -1.0);
      const TestResult r = wilcoxon_signed_rank(dv(d), cfg_with_seed(0));
      REQUIRE(r.method == Method::exact);
      std::vector<double> ranks(n);
      std::vector<std::pair<double, int>> abs_sorted;
      for (int i = 0; i < n; ++i) abs_sorted.emplace_back(std::abs(d[i]), i);
      std::sort(abs_sorted.begin(), abs_sorted.end());
      for (int i = 0; i < n; ++i) ranks[abs_sorted[i].second] = i + 1.0;
      double w_obs = 0.0;
      std::vector<double> rank_values(n);
      for (int i = 0; i < n; ++i) {
        rank_values[i] = ranks[i];
        if (d[i] > 0) w_obs += ranks[i];
      }
      CHECK(r.p_value ==
            doctest::Approx(wilcoxon_exact_bruteforce(rank_values, w_obs))
                .epsilon(1e-12));
    }
  }
  SUBCASE("symmetric pairs with tied magnitudes give p = 1") {
    const TestResult r =
        wilcoxon_signed_rank(dv({0.4, -0.4, 0.7, -0.7}), cfg_with_seed(0));
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("all zeros is degenerate") {
    const TestResult r = wilcoxon_signed_rank(dv({0, 0, 0}), cfg_with_seed(0));
    CHECK(r.p_value == 1.0);
    CHECK(r.method == Method::degenerate);
  }
}

TEST_CASE("wilcoxon normal approximation tracks the sign-flip null") {
  // Monte-Carlo estimate (R = 200,000) of the exact permutation p for a
  // 60-point vector, compared at +-0.01.
  std::mt19937_64 gen(31);
  std::normal_distribution<double> noise(0.05, 0.3);
  std::vector<double> d(60);
  for (double& x : d) x = noise(gen);

  const TestResult r = wilcoxon_signed_rank(dv(d), cfg_with_seed(0));
  REQUIRE(r.method == Method::normal_approx);

  std::vector<double> ranks;
  {
    std::vector<double> abs_vals;
    for (double x : d) {
      if (x != 0.0) abs_vals.push_back(std::abs(x));
    }
    std::vector<double> sorted = abs_vals;
    std::sort(sorted.begin(), sorted.end());
    for (double a : abs_vals) {
      const auto lo = std::lower_bound(sorted.begin(), sorted.end(), a);
      const auto hi = std::upper_bound(sorted.begin(), sorted.end(), a);
      const double first = static_cast<double>(lo - sorted.begin()) + 1.0;
      const double last = static_cast<double>(hi - sorted.begin());
      ranks.push_back(0.5 * (first + last));
    }
  }
  double w_obs = 0.0;
  {
    std::size_t j = 0;
    for (double x : d) {
      if (x == 0.0) continue;
      if (x > 0.0) w_obs += ranks[j];
      ++j;
    }
  }
  const int reps = 200000;
  int below = 0;
  int above = 0;
  for (int rep = 0; rep < reps; ++rep) {
    double w = 0.0;
    for (double rank : ranks) {
      if (gen() & 1) w += rank;
    }
    if (w <= w_obs) ++below;
    if (w >= w_obs) ++above;
  }
  const double mc_p =
      std::min(1.0, 2.0 * std::min(below, above) / static_cast<double>(reps));
  CHECK(std::abs(r.p_value - mc_p) < 0.01);
}

TEST_CASE("run_all_tests contract") {
  ResamplingConfig cfg = cfg_with_seed(1234);
  std::vector<double> b = {0.2, 0.4, 0.1, 0.9, 0.5, 0.3};
  std::vector<double> e = {0.3, 0.2, 0.4, 0.8, 0.9, 0.1};

  SUBCASE("exactly five entries") {
    const auto results = run_all_tests(b, e, cfg);
    CHECK(results.size() == 5);
    for (TestName name : all_test_names()) CHECK(results.count(name) == 1);
  }
  SUBCASE("identical vectors give p = 1 everywhere") {
    const auto results = run_all_tests(b, b, cfg);
    for (const auto& [name, r] : results) {
      INFO(test_label(name));
      CHECK(r.p_value == 1.0);
    }
  }
  SUBCASE("mismatched lengths are rejected") {
    std::vector<double> shorter(b.begin(), b.end() - 1);
    CHECK_THROWS_AS(run_all_tests(b, shorter, cfg), std::invalid_argument);
  }
  SUBCASE("same seed reproduces every p-value bitwise") {
    const auto r1 = run_all_tests(b, e, cfg);
    const auto r2 = run_all_tests(b, e, cfg);
    for (const auto& [name, r] : r1) {
      CHECK(r.p_value == r2.at(name).p_value);
      CHECK(r.statistic == r2.at(name).statistic);
    }
  }
  SUBCASE("results match standalone invocations with the same seed") {
    const auto results = run_all_tests(b, e, cfg);
    std::vector<double> d(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) d[i] = e[i] - b[i];
    CHECK(results.at(TestName::bootstrap).p_value ==
          bootstrap_shift_test(dv(d), cfg).p_value);
    CHECK(results.at(TestName::randomization).p_value ==
          randomization_test(dv(d), cfg).p_value);
  }
}

TEST_CASE("sign-flip symmetry: p(d) == p(-d)") {
  std::mt19937_64 gen(77);
  std::normal_distribution<double> noise(0.1, 0.4);
  ResamplingConfig cfg = cfg_with_seed(9);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> d(25);
    for (double& x : d) x = noise(gen);
    std::vector<double> neg(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) neg[i] = -d[i];

    CHECK(t_test_paired(dv(d)).p_value ==
          doctest::Approx(t_test_paired(dv(neg)).p_value).epsilon(1e-12));
    CHECK(sign_test(dv(d)).p_value ==
          doctest::Approx(sign_test(dv(neg)).p_value).epsilon(1e-12));
    CHECK(wilcoxon_signed_rank(dv(d), cfg).p_value ==
          doctest::Approx(wilcoxon_signed_rank(dv(neg), cfg).p_value).epsilon(1e-12));
    CHECK(randomization_test(dv(d), cfg).p_value ==
          doctest::Approx(randomization_test(dv(neg), cfg).p_value).epsilon(1e-12));
    CHECK(bootstrap_shift_test(dv(d), cfg).p_value ==
          doctest::Approx(bootstrap_shift_test(dv(neg), cfg).p_value).epsilon(1e-12));
  }
}

TEST_CASE("scale invariance under d -> c*d") {
  std::mt19937_64 gen(78);
  std::normal_distribution<double> noise(0.05, 0.2);
  ResamplingConfig cfg = cfg_with_seed(10);
  for (double c : {3.0, 0.125, 41.5}) {
    std::vector<double> d(30);
    for (double& x : d) x = noise(gen);
    std::vector<double> scaled(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) scaled[i] = c * d[i];

    CHECK(t_test_paired(dv(d)).p_value ==
          doctest::Approx(t_test_paired(dv(scaled)).p_value).epsilon(1e-9));
    CHECK(sign_test(dv(d)).p_value == sign_test(dv(scaled)).p_value);
    CHECK(wilcoxon_signed_rank(dv(d), cfg).p_value ==
          wilcoxon_signed_rank(dv(scaled), cfg).p_value);
    CHECK(randomization_test(dv(d), cfg).p_value ==
          doctest::Approx(randomization_test(dv(scaled), cfg).p_value).epsilon(1e-9));
    CHECK(bootstrap_shift_test(dv(d), cfg).p_value ==
          doctest::Approx(bootstrap_shift_test(dv(scaled), cfg).p_value).epsilon(1e-9));
  }
}

TEST_CASE("golden fixtures match the reference statistics implementation") {
  std::ifstream in(std::string(SIGSCALE_FIXTURES_DIR) + "/golden_tests.json");
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  ResamplingConfig cfg = cfg_with_seed(0);
  REQUIRE(j.at("fixtures").size() == 20);
  for (const auto& fixture : j.at("fixtures")) {
    const auto d = fixture.at("d").get<std::vector<double>>();
    INFO("fixture with n=" << d.size());

    const TestResult t = t_test_paired(dv(d));
    CHECK(t.statistic ==
          doctest::Approx(fixture.at("t_statistic").get<double>()).epsilon(1e-9));
    CHECK(std::abs(t.p_value - fixture.at("t_p").get<double>()) < 1e-6);

    const TestResult s = sign_test(dv(d));
    CHECK(std::abs(s.p_value - fixture.at("sign_p").get<double>()) < 1e-6);

    const TestResult w = wilcoxon_signed_rank(dv(d), cfg);
    CHECK(method_label(w.method) == fixture.at("wilcoxon_method").get<std::string>());
    CHECK(w.statistic ==
          doctest::Approx(fixture.at("wilcoxon_w_plus").get<double>()));
    CHECK(std::abs(w.p_value - fixture.at("wilcoxon_p").get<double>()) < 1e-6);
  }
}
