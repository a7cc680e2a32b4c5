#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lexrec/error.hpp"
#include "lexrec/hmm.hpp"
#include "oracles.hpp"

using namespace lexrec;

namespace {

// entry -> 1 -> exit, state 1 always emits symbol 0.
Hmm chain() {
  Hmm h(3, 2);
  h.set_trans(0, 1, 1.0);
  h.set_trans(1, 2, 1.0);
  h.set_obs(1, 0, 1.0);
  return h;
}

bool rel_close(double a, double b, double tol) {
  if (a == b) return true;
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no lexrec::Error thrown");
  return ErrorKind::kInternal;
}

}  // namespace

TEST_CASE("deterministic chain") {
  const Hmm h = chain();
  h.validate();
  const std::vector<Symbol> o{0};
  const Trellis f = forward(h, o);
  CHECK(f.probability == doctest::Approx(1.0));
  CHECK(f.log_probability == doctest::Approx(0.0));
  const Trellis b = backward(h, o);
  CHECK(b.beta(1, 1) == doctest::Approx(1.0));
  CHECK(b.beta(0, 0) == doctest::Approx(1.0));
  const auto v = viterbi(h, o);
  CHECK(v.probability == doctest::Approx(1.0));
  CHECK(v.path == std::vector<std::size_t>{1});
  const auto c = viterbi_cost(h, o);
  CHECK(c.cost == 0.0);
  CHECK(c.path == std::vector<std::size_t>{1});
}

TEST_CASE("impossible emission gives zero probability and infinite cost") {
  const Hmm h = chain();
  const std::vector<Symbol> o{1};
  const Trellis f = forward(h, o);
  CHECK(f.probability == 0.0);
  CHECK_FALSE(f.possible());
  const auto v = viterbi(h, o);
  CHECK(v.probability == 0.0);
  CHECK(v.path.empty());
  const auto c = viterbi_cost(h, o);
  CHECK(c.cost == kInfiniteCost);
  CHECK(c.path.empty());
}

TEST_CASE("input validation") {
  const Hmm h = chain();
  CHECK(kind_of([&] { (void)forward(h, std::vector<Symbol>{2}); }) == ErrorKind::kInput);
  CHECK(kind_of([&] { (void)forward(h, std::vector<Symbol>{}); }) == ErrorKind::kInput);
  CHECK(kind_of([&] { (void)viterbi_cost(h, std::vector<Symbol>{5}); }) == ErrorKind::kInput);
  Hmm bad = chain();
  bad.set_trans(1, 2, 0.5);
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("forward, backward and Viterbi against enumeration") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 3 + rep % 4;
    const std::size_t k = 1 + rep % 4;
    const std::size_t len = 1 + rep % 6;
    const Hmm h = oracle::random_hmm(rng, n, k);
    const auto o = oracle::random_obs(rng, len, k);
    const double total = oracle::total_probability(h, o);
    const double best = oracle::best_path_probability(h, o);
    const Trellis tr = backward(h, o);
    CHECK(rel_close(tr.probability, total, 1e-12));
    CHECK(rel_close(tr.beta(0, 0), total, 1e-12));
    const auto v = viterbi(h, o);
    CHECK(rel_close(v.probability, best, 1e-12));
    CHECK(v.probability <= total * (1 + 1e-12));
    const auto c = viterbi_cost(h, o);
    if (best > 0.0) {
      CHECK(c.cost == doctest::Approx(-std::log(best)).epsilon(1e-9));
      CHECK(rel_close(oracle::path_probability(h, o, c.path), best, 1e-12));
    } else {
      CHECK(c.cost == kInfiniteCost);
    }
    for (std::size_t t = 0; t <= len; ++t) {
      for (std::size_t i = 0; i + 1 < n; ++i) {
        if (t > 0 && i == 0) continue;
        CHECK(rel_close(tr.beta(t, i), oracle::suffix_probability(h, o, t, i), 1e-10));
      }
    }
  }
}

TEST_CASE("scaled forward survives long sequences") {
  std::mt19937_64 rng(3);
  Hmm h = oracle::random_hmm(rng, 5, 3, 0.0);
  const auto o = oracle::random_obs(rng, 2000, 3);
  const Trellis tr = forward(h, o);
  CHECK(std::isfinite(tr.log_probability));
  CHECK(tr.log_probability < -100.0);
  CHECK(tr.log_probability >= -viterbi_cost(h, o).cost);
}

TEST_CASE("Viterbi tie-break picks the lowest predecessor") {
  // Two symmetric emitting states; both paths of length 1 cost the same.
  Hmm h(4, 1);
  h.set_trans(0, 1, 0.5);
  h.set_trans(0, 2, 0.5);
  h.set_trans(1, 3, 1.0);
  h.set_trans(2, 3, 1.0);
  h.set_obs(1, 0, 1.0);
  h.set_obs(2, 0, 1.0);
  CHECK(viterbi(h, std::vector<Symbol>{0}).path == std::vector<std::size_t>{1});
  CHECK(viterbi_cost(h, std::vector<Symbol>{0}).path == std::vector<std::size_t>{1});
  // Length 2: both states can reach state 2 with equal score.
  Hmm g(4, 1);
  g.set_trans(0, 1, 0.5);
  g.set_trans(0, 2, 0.5);
  g.set_trans(1, 2, 1.0);
  g.set_trans(2, 2, 0.5);
  g.set_trans(2, 3, 0.5);
  g.set_obs(1, 0, 1.0);
  g.set_obs(2, 0, 1.0);
  // 0->1->2: 0.5*1*0.5 ; 0->2->2: 0.5*0.5*0.5. Not a tie; path via 1.
  CHECK(viterbi_cost(g, std::vector<Symbol>{0, 0}).path == std::vector<std::size_t>{1, 2});
}

TEST_CASE("Baum-Welch leaves a fixed point unchanged") {
  const Hmm h = chain();
  const auto r = baum_welch(h, std::vector<Symbol>{0});
  CHECK(r.model == h);
}

TEST_CASE("Baum-Welch is monotone and keeps rows stochastic") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const Hmm h = oracle::random_hmm(rng, 5, 3, 0.0);
    const auto o = oracle::random_obs(rng, 8, 3);
    TrainingOptions opt;
    opt.max_iters = 10;
    opt.conv_eps = -1.0;
    const auto r = baum_welch(h, o, opt);
    CHECK(r.iterations == 10);
    for (std::size_t i = 1; i < r.log_likelihood.size(); ++i) {
      CHECK(r.log_likelihood[i] >= r.log_likelihood[i - 1] - 1e-12);
    }
    r.model.validate(1e-9);
  }
}

TEST_CASE("Baum-Welch impossible data") {
  const Hmm h = chain();
  CHECK(kind_of([&] { (void)baum_welch(h, std::vector<Symbol>{1}); }) == ErrorKind::kTraining);
  const std::vector<ObservationSequence> corpus{{1}, {1, 1}};
  CHECK(kind_of([&] { (void)baum_welch_multi(h, corpus); }) == ErrorKind::kTraining);
  const std::vector<ObservationSequence> mixed{{1}, {0}};
  const auto r = baum_welch_multi(h, mixed);
  CHECK(r.skipped_sequences == 1);
}

TEST_CASE("multi-sequence pooling") {
  std::mt19937_64 rng(11);
  const Hmm h = oracle::random_hmm(rng, 5, 3, 0.0);
  const ObservationSequence a = oracle::random_obs(rng, 6, 3);
  const ObservationSequence b = oracle::random_obs(rng, 5, 3);
  TrainingOptions opt;
  opt.max_iters = 5;
  opt.conv_eps = -1.0;

  const auto single = baum_welch(h, a, opt);
  const std::vector<ObservationSequence> one{a};
  CHECK(baum_welch_multi(h, one, opt).model == single.model);

  const std::vector<ObservationSequence> twice{a, a};
  const auto doubled = baum_welch_multi(h, twice, opt);
  for (std::size_t i = 0; i + 1 < h.num_states(); ++i) {
    for (std::size_t j = 1; j < h.num_states(); ++j) {
      CHECK(doubled.model.trans(i, j) == doctest::Approx(single.model.trans(i, j)).epsilon(1e-12));
    }
  }

  const std::vector<ObservationSequence> two{a, b};
  const auto r = baum_welch_multi(h, two, opt);
  CHECK(r.log_likelihood[5] >= r.log_likelihood[1] - 1e-12);
}

TEST_CASE("converged model is a near fixed point") {
  std::mt19937_64 rng(23);
  const Hmm h = oracle::random_hmm(rng, 4, 2, 0.0);
  const auto o = oracle::random_obs(rng, 7, 2);
  TrainingOptions opt;
  opt.max_iters = 5000;
  opt.conv_eps = 1e-12;
  const auto r = baum_welch(h, o, opt);
  REQUIRE(r.converged);
  TrainingOptions one;
  one.max_iters = 1;
  one.conv_eps = -1.0;
  const auto again = baum_welch(r.model, o, one);
  CHECK(std::abs(again.log_likelihood.back() - r.log_likelihood.back()) < 1e-9);
}

TEST_CASE("structural zeros survive training") {
  std::mt19937_64 rng(29);
  Hmm h = oracle::random_hmm(rng, 5, 3, 0.0);
  h.set_trans(1, 3, 0.0);
  auto row = h.trans_row(1);
  double s = 0.0;
  for (double v : row) s += v;
  for (auto& v : row) v /= s;
  const auto r = baum_welch(h, oracle::random_obs(rng, 8, 3));
  CHECK(r.model.trans(1, 3) == 0.0);
}

TEST_CASE("additive smoothing") {
  const std::vector<double> a{1.0, 0.0};
  const auto sa = smooth_additive(a, 1e-4);
  CHECK(sa[0] == doctest::Approx(0.9999).epsilon(1e-12));
  CHECK(sa[1] == doctest::Approx(1e-4).epsilon(1e-12));

  const std::vector<double> b{0.25, 0.75};
  CHECK(smooth_additive(b, 1e-4) == b);

  const std::vector<double> c{0.5, 0.5, 0.0, 0.0};
  const auto sc = smooth_additive(c, 1e-4, {false, false, true, false});
  CHECK(sc[0] == doctest::Approx(0.49995).epsilon(1e-12));
  CHECK(sc[1] == doctest::Approx(0.49995).epsilon(1e-12));
  CHECK(sc[2] == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(sc[3] == 0.0);

  CHECK(kind_of([&] { (void)smooth_additive(std::vector<double>{1.0, 0.0, 0.0}, 0.6); }) ==
        ErrorKind::kParameter);
}

TEST_CASE("smoothing keeps rows stochastic with a floor everywhere eligible") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const auto row = oracle::random_row(rng, 2 + rep % 30, 0.5);
    const auto out = smooth_additive(row, 1e-3);
    double s = 0.0;
    for (double v : out) {
      CHECK(v >= 1e-3 * (1 - 1e-12));
      s += v;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("serialisation round trip") {
  std::mt19937_64 rng(37);
  const Hmm h = oracle::random_hmm(rng, 6, 4);
  const std::vector<std::string> symbols{" ", "a\tb", "", "\\"};
  std::stringstream ss;
  write_hmm(ss, h, symbols);
  const HmmFile back = read_hmm(ss);
  CHECK(back.hmm == h);
  CHECK(back.symbols == symbols);

  std::stringstream broken("LEXREC-HMM 1\nstates 2\n");
  CHECK_THROWS_AS(read_hmm(broken), Error);
}
