#pragma once

// Independent reference computations used by the unit and acceptance tests.
// They deliberately avoid the library's own scoring and ranking code.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "kgr/embed.hpp"
#include "kgr/eval.hpp"
#include "kgr/filter.hpp"

namespace oracle {

using big = boost::multiprecision::cpp_bin_float_50;

/// 2 * sum O ln(O / E) with E = row * col / n, in 50-digit arithmetic.
inline double g2(const kgr::ContingencyTable& t) {
  const big o[2][2] = {{big(t.o11), big(t.o12)}, {big(t.o21), big(t.o22)}};
  const big n = o[0][0] + o[0][1] + o[1][0] + o[1][1];
  const big row[2] = {o[0][0] + o[0][1], o[1][0] + o[1][1]};
  const big col[2] = {o[0][0] + o[1][0], o[0][1] + o[1][1]};
  big sum = 0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (o[i][j] == 0) continue;
      const big e = row[i] * col[j] / n;
      sum += o[i][j] * boost::multiprecision::log(o[i][j] / e);
    }
  }
  return static_cast<double>(2 * sum);
}

/// Plain re-statement of the score functions. ComplEx rows are [re..., im...].
inline double score(kgr::Model m, std::span<const double> h, std::span<const double> r,
                    std::span<const double> t) {
  switch (m) {
    case kgr::Model::TransE_L1: {
      long double s = 0;
      for (std::size_t i = 0; i < h.size(); ++i) s += std::fabs(h[i] + r[i] - t[i]);
      return static_cast<double>(-s);
    }
    case kgr::Model::TransE_L2: {
      long double s = 0;
      for (std::size_t i = 0; i < h.size(); ++i) {
        const long double d = h[i] + r[i] - t[i];
        s += d * d;
      }
      return static_cast<double>(-std::sqrt(s));
    }
    case kgr::Model::DistMult: {
      long double s = 0;
      for (std::size_t i = 0; i < h.size(); ++i) s += static_cast<long double>(h[i]) * r[i] * t[i];
      return static_cast<double>(s);
    }
    case kgr::Model::ComplEx: {
      const std::size_t d = h.size() / 2;
      std::complex<long double> s = 0;
      for (std::size_t i = 0; i < d; ++i) {
        const std::complex<long double> a(h[i], h[d + i]);
        const std::complex<long double> b(r[i], r[d + i]);
        const std::complex<long double> c(t[i], t[d + i]);
        s += a * b * std::conj(c);
      }
      return static_cast<double>(s.real());
    }
  }
  return 0;
}

inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// Batch loss recomputed from scratch against a store.
inline double loss(const kgr::EmbeddingStore& s, std::span<const kgr::LabeledTriple> batch) {
  double total = 0;
  for (const auto& b : batch) {
    const double f = score(s.model(), s.entity(b.head), s.relation(b.relation), s.entity(b.tail));
    total += softplus(-b.label * f);
  }
  return total;
}

/// 1-based rank of the answer among all candidates after an exhaustive sort,
/// counting ties at their average position. `skip(h, t)` drops that candidate.
template <class Skip>
double sorted_rank(const kgr::EmbeddingStore& s, const kgr::Query& q, Skip skip) {
  const auto answer = q.side == kgr::QuerySide::Tail ? q.triple.tail : q.triple.head;
  std::vector<double> scores;
  double answer_score = 0;
  for (kgr::EntityIndex c = 0; c < s.entity_count(); ++c) {
    const auto h = q.side == kgr::QuerySide::Head ? c : q.triple.head;
    const auto t = q.side == kgr::QuerySide::Tail ? c : q.triple.tail;
    const double v =
        score(s.model(), s.entity(h), s.relation(q.triple.relation), s.entity(t));
    if (c == answer) {
      answer_score = v;
    } else if (skip(h, t)) {
      continue;
    }
    scores.push_back(v);
  }
  std::sort(scores.begin(), scores.end(), std::greater<>());
  const auto first = std::find(scores.begin(), scores.end(), answer_score) - scores.begin();
  const auto last = scores.rend() - std::find(scores.rbegin(), scores.rend(), answer_score) - 1;
  return (static_cast<double>(first + 1) + static_cast<double>(last + 1)) / 2.0;
}

struct Metrics {
  long double mr = 0, mrr = 0, h1 = 0, h3 = 0, h10 = 0;
};

inline Metrics metrics(std::span<const double> ranks) {
  Metrics m;
  for (double r : ranks) {
    m.mr += r;
    m.mrr += 1.0L / r;
    m.h1 += r <= 1;
    m.h3 += r <= 3;
    m.h10 += r <= 10;
  }
  const long double n = ranks.size();
  m.mr /= n;
  m.mrr /= n;
  m.h1 /= n;
  m.h3 /= n;
  m.h10 /= n;
  return m;
}

struct GradCheck {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst = 0;  // largest |analytic - numeric| / allowed
};

/// Compares loss_and_grad against central differences of `oracle::loss` on
/// `batches` random stores and batches. Every touched coordinate must agree
/// within `rel` relative error, with an absolute floor `abs_floor`.
inline GradCheck gradient_check(kgr::Model model, std::size_t dim, std::size_t batches,
                                std::uint64_t seed, double rel = 1e-4, double abs_floor = 1e-6,
                                double step = 1e-5) {
  GradCheck out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  constexpr std::size_t kEntities = 6, kRelations = 3, kBatch = 8;
  for (std::size_t b = 0; b < batches; ++b) {
    kgr::EmbeddingStore store(model, dim, kEntities, kRelations);
    std::vector<kgr::LabeledTriple> batch;
    for (;;) {
      for (auto& x : store.entity_data()) x = u(rng);
      for (auto& x : store.relation_data()) x = u(rng);
      batch.clear();
      for (std::size_t i = 0; i < kBatch; ++i) {
        batch.push_back({static_cast<kgr::EntityIndex>(rng() % kEntities),
                         static_cast<kgr::RelationIndex>(rng() % kRelations),
                         static_cast<kgr::EntityIndex>(rng() % kEntities), i % 2 ? -1 : 1});
      }
      // |x| is not differentiable at 0: keep L1 residuals clear of the kink.
      if (model != kgr::Model::TransE_L1) break;
      bool clear = true;
      for (const auto& t : batch) {
        const auto h = store.entity(t.head), r = store.relation(t.relation), tl = store.entity(t.tail);
        for (std::size_t i = 0; i < dim; ++i) clear &= std::fabs(h[i] + r[i] - tl[i]) > 10 * step;
      }
      if (clear) break;
    }
    const auto lg = kgr::loss_and_grad(store, batch);
    auto check_row = [&](std::span<double> row, std::span<const double> analytic) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        const double keep = row[i];
        row[i] = keep + step;
        const double up = loss(store, batch);
        row[i] = keep - step;
        const double down = loss(store, batch);
        row[i] = keep;
        const double numeric = (up - down) / (2 * step);
        const double a = analytic.empty() ? 0.0 : analytic[i];
        const double allowed = std::max(rel * std::max(std::fabs(a), std::fabs(numeric)), abs_floor);
        const double ratio = std::fabs(a - numeric) / allowed;
        out.worst = std::max(out.worst, ratio);
        out.failures += ratio > 1;
        ++out.checked;
      }
    };
    for (kgr::EntityIndex e = 0; e < kEntities; ++e) check_row(store.entity(e), lg.grad.find_entity(e));
    for (kgr::RelationIndex r = 0; r < kRelations; ++r) {
      check_row(store.relation(r), lg.grad.find_relation(r));
    }
  }
  return out;
}

}  // namespace oracle
