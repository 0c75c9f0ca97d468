#include <doctest.h>

#include <cmath>
#include <random>

#include "kgr/embed.hpp"
#include "kgr/error.hpp"
#include "kgr/synth.hpp"
#include "kgr/eval.hpp"
#include "oracles.hpp"

using namespace kgr;

namespace {

using V = std::vector<double>;

double sv(Model m, const V& h, const V& r, const V& t) { return score_vectors(m, h, r, t); }

V random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1, 1);
  V v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

const Model kModels[] = {Model::TransE_L1, Model::TransE_L2, Model::DistMult, Model::ComplEx};

}  // namespace

TEST_CASE("score identities") {
  CHECK(sv(Model::TransE_L2, {1, 0}, {0, 1}, {1, 1}) == 0.0);
  CHECK(sv(Model::TransE_L2, {0, 0}, {3, 4}, {0, 0}) == -5.0);
  CHECK(sv(Model::TransE_L1, {0, 0}, {3, 4}, {0, 0}) == -7.0);
  CHECK(sv(Model::DistMult, {1, 2}, {3, 4}, {5, 6}) == 63.0);
  // h = 1 + 0i, r = 0 + 1i, t = 0 + 1i, stored as [re, im].
  CHECK(sv(Model::ComplEx, {1, 0}, {0, 1}, {0, 1}) == 1.0);
}

TEST_CASE("model names") {
  CHECK(parse_model("TransE-L2") == Model::TransE_L2);
  CHECK(parse_model("transe_l1") == Model::TransE_L1);
  CHECK(parse_model("TransE") == Model::TransE_L2);
  CHECK(parse_model("complex") == Model::ComplEx);
  CHECK(parse_model(model_name(Model::DistMult)) == Model::DistMult);
  CHECK_THROWS_AS(parse_model("RotatE"), ValidationError);
}

TEST_CASE("score properties") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    const auto h = random_vector(rng, 6), r = random_vector(rng, 6), t = random_vector(rng, 6);
    CHECK(sv(Model::DistMult, h, r, t) == sv(Model::DistMult, t, r, h));
    CHECK(sv(Model::TransE_L1, h, r, t) <= 0.0);
    CHECK(sv(Model::TransE_L2, h, r, t) < 0.0);
    for (auto m : kModels) {
      const auto width = m == Model::ComplEx ? 12 : 6;
      const auto a = random_vector(rng, width), b = random_vector(rng, width),
                 c = random_vector(rng, width);
      CHECK(score_vectors(m, a, b, c) == doctest::Approx(oracle::score(m, a, b, c)).epsilon(1e-12));
    }

    // Zero imaginary parts everywhere: ComplEx reduces to DistMult on the real parts.
    V hc(12, 0.0), rc(12, 0.0), tc(12, 0.0);
    std::copy(h.begin(), h.end(), hc.begin());
    std::copy(r.begin(), r.end(), rc.begin());
    std::copy(t.begin(), t.end(), tc.begin());
    CHECK(sv(Model::ComplEx, hc, rc, tc) == sv(Model::DistMult, h, r, t));

    // Relation imaginary parts zero: DistMult(re) + DistMult(im).
    const auto hf = random_vector(rng, 12), tf = random_vector(rng, 12);
    const V h_re(hf.begin(), hf.begin() + 6), h_im(hf.begin() + 6, hf.end());
    const V t_re(tf.begin(), tf.begin() + 6), t_im(tf.begin() + 6, tf.end());
    CHECK(sv(Model::ComplEx, hf, rc, tf) ==
          doctest::Approx(sv(Model::DistMult, h_re, r, t_re) + sv(Model::DistMult, h_im, r, t_im))
              .epsilon(1e-14));
  }
  const V h{0.25, -0.5}, r{0.125, 0.75};
  V t(2);
  for (int i = 0; i < 2; ++i) t[i] = h[i] + r[i];
  CHECK(sv(Model::TransE_L2, h, r, t) == 0.0);
  CHECK(sv(Model::TransE_L1, h, r, t) == 0.0);
}

TEST_CASE("loss values") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(std::abs(softplus(0.0) - 0.6931471805599453) < 1e-12);
  CHECK(softplus(-800.0) < 1e-300);
  CHECK(softplus(800.0) == 800.0);
  CHECK(std::isfinite(softplus(1e308)));
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-800.0) == 0.0);
  CHECK(sigmoid(800.0) == 1.0);

  EmbeddingStore s(Model::DistMult, 2, 2, 1);
  s.entity(0)[0] = 1;
  s.entity(1)[0] = 1;
  s.relation(0)[0] = 500;
  const LabeledTriple pos{0, 0, 1, 1}, neg{0, 0, 1, -1};
  CHECK(loss_and_grad(s, std::vector{pos}).loss < 1e-200);
  CHECK(loss_and_grad(s, std::vector{neg}).loss == doctest::Approx(500.0));
  s.relation(0)[0] = 0;
  CHECK(loss_and_grad(s, std::vector{pos}).loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("analytic gradients match finite differences") {
  for (auto m : kModels) {
    CAPTURE(model_name(m));
    const auto r = oracle::gradient_check(m, 4, 20, 99);
    CHECK(r.failures == 0);
    CHECK(r.checked > 0);
  }
}

TEST_CASE("gradient rows follow first touch") {
  EmbeddingStore s(Model::TransE_L2, 2, 5, 2);
  std::mt19937_64 rng(1);
  for (auto& x : s.entity_data()) x = std::uniform_real_distribution<double>(-1, 1)(rng);
  for (auto& x : s.relation_data()) x = std::uniform_real_distribution<double>(-1, 1)(rng);
  const std::vector<LabeledTriple> batch{{3, 1, 0, 1}, {2, 0, 3, -1}};
  const auto lg = loss_and_grad(s, batch);
  CHECK(lg.grad.entities() == std::vector<EntityIndex>{3, 0, 2});
  CHECK(lg.grad.relations() == std::vector<RelationIndex>{1, 0});
  CHECK(lg.grad.find_entity(4).empty());
}

TEST_CASE("corruption") {
  std::mt19937_64 rng(3);
  const TripleKey t{0, 0, 1};
  for (int i = 0; i < 100; ++i) {
    const auto c = corrupt(rng, t, CorruptSide::Head, 2);
    CHECK(c == TripleKey{1, 0, 1});
  }
  for (int i = 0; i < 1000; ++i) {
    const TripleKey x{static_cast<EntityIndex>(rng() % 5), 0, static_cast<EntityIndex>(rng() % 5)};
    const auto c = sample_negative(rng, x, 5);
    CHECK_FALSE(c == x);
    CHECK(c.relation == x.relation);
    CHECK((c.head == x.head || c.tail == x.tail));
  }
  std::size_t heads = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto c = sample_negative(rng, TripleKey{4, 0, 7}, 50);
    heads += c.head != 4;
  }
  CHECK(heads >= 4800);
  CHECK(heads <= 5200);
  CHECK_THROWS_AS(corrupt(rng, t, CorruptSide::Tail, 1), ValidationError);

  TripleSet known{{0, 0, 1}, {0, 0, 2}, {0, 0, 3}};
  for (int i = 0; i < 200; ++i) {
    const auto c = corrupt(rng, TripleKey{0, 0, 1}, CorruptSide::Tail, 10, &known);
    CHECK(c.tail != 1);
    CHECK(known.count(c) == 0);
  }
}

TEST_CASE("training config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.effective_init_scale() == doctest::Approx(6.0 / std::sqrt(250.0)));
  auto bad = c;
  bad.dim = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.lr = -1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.threads = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("zero epochs returns the seeded initialization") {
  TrainConfig c;
  c.dim = 8;
  c.epochs = 0;
  const std::vector<Triple> pos{{0, 0, 1, {}, 1}, {1, 0, 2, {}, 1}};
  const auto init = init_store(c, 3, 1);
  CHECK(train(3, 1, pos, c) == init);
  for (double x : init.entity_data()) CHECK(std::abs(x) <= c.effective_init_scale());
  auto other = c;
  other.seed = 43;
  CHECK_FALSE(init_store(other, 3, 1) == init);
}

TEST_CASE("training is deterministic and the loss falls") {
  const auto b = synth::make_benchmark(1);
  const auto g = KnowledgeGraph::build(b.predications);
  const auto split = time_split(g, b.train_cutoff, b.test_cutoff);
  TrainConfig c;
  c.dim = 20;
  c.epochs = 5;
  c.seed = 8;
  std::vector<double> losses;
  const auto a = train(g.entity_count(), g.relation_count(), split.train, c,
                       [&](const EpochStats& s) { losses.push_back(s.mean_loss); });
  const auto again = train(g.entity_count(), g.relation_count(), split.train, c);
  CHECK(a == again);
  REQUIRE(losses.size() == 5);
  for (std::size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] < losses[i - 1]);
  for (EntityIndex e = 0; e < a.entity_count(); ++e) {
    double norm = 0;
    for (double x : a.entity(e)) norm += x * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
  }

  for (auto m : {Model::DistMult, Model::ComplEx, Model::TransE_L1}) {
    auto mc = c;
    mc.model = m;
    losses.clear();
    train(g.entity_count(), g.relation_count(), split.train, mc,
          [&](const EpochStats& s) { losses.push_back(s.mean_loss); });
    CAPTURE(model_name(m));
    CHECK(losses.back() < losses.front());
  }
}

TEST_CASE("divergence is reported") {
  const std::vector<Triple> pos{{0, 0, 1, {}, 1}, {1, 0, 2, {}, 1}, {2, 0, 0, {}, 1}};
  TrainConfig c;
  c.model = Model::DistMult;
  c.dim = 4;
  c.lr = 1e200;
  c.init_scale = 10.0;
  c.epochs = 50;
  try {
    train(3, 1, pos, c);
    FAIL("expected divergence");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
  }
}

TEST_CASE("parallel training stays finite") {
  const auto b = synth::make_benchmark(2);
  const auto g = KnowledgeGraph::build(b.predications);
  TrainConfig c;
  c.dim = 16;
  c.epochs = 3;
  c.threads = 4;
  const auto s = train(g.entity_count(), g.relation_count(), g.triples(), c);
  CHECK(s.all_finite());
}
