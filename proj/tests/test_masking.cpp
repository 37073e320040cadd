#include "bucketmask/error.hpp"
#include "bucketmask/masking.hpp"
#include "bucketmask/stats.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace bucketmask;
using namespace bucketmask::masking;
using structures::ContactMap;

namespace {

ContactMap empty_graph(std::size_t n) { return ContactMap::from_edges(std::vector<bool>(n, true), 7.0, {}); }

void check_plan_shape(const MaskPlan& p, std::size_t length, double rate) {
  REQUIRE(p.length == length);
  CHECK(p.size() == static_cast<std::size_t>(std::floor(static_cast<double>(length) * rate)));
  CHECK(std::is_sorted(p.struct_indices.begin(), p.struct_indices.end()));
  CHECK(std::is_sorted(p.rand_indices.begin(), p.rand_indices.end()));
  std::set<std::size_t> all(p.struct_indices.begin(), p.struct_indices.end());
  all.insert(p.rand_indices.begin(), p.rand_indices.end());
  CHECK(all.size() == p.size());
  if (!all.empty()) CHECK(*all.rbegin() < length);
}

std::string sequence_of(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(kStandardAminoAcids[i % kStandardAminoAcids.size()]);
  return s;
}

}  // namespace

TEST_CASE("strategy names") {
  CHECK(to_string(Strategy::GmSpan) == "gm_span");
  CHECK(parse_strategy("gm-span") == Strategy::GmSpan);
  CHECK(parse_strategy("bucket") == Strategy::Bucket);
  CHECK_FALSE(parse_strategy("span").has_value());
}

TEST_CASE("config validation") {
  MaskConfig c;
  CHECK_NOTHROW(c.validate());
  c.rate_min = 0.8;
  CHECK_THROWS_AS(c.validate(), Error);
  c = MaskConfig{};
  c.corruption.mask_p = 0.7;
  CHECK_THROWS_AS(c.validate(), Error);
  c = MaskConfig{};
  c.lambda = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("sample_rate") {
  SUBCASE("degenerate interval") {
    MaskConfig c;
    c.rate_min = c.rate_max = 0.15;
    Rng rng(1);
    CHECK(sample_rate(rng, c) == 0.15);
  }
  SUBCASE("mean of many draws") {
    MaskConfig c;
    Rng rng(2);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double r = sample_rate(rng, c);
      REQUIRE(r >= 0.15);
      REQUIRE(r < 0.75);
      sum += r;
    }
    CHECK(std::abs(sum / n - 0.45) < 0.01);
  }
  SUBCASE("determinism") {
    MaskConfig c;
    Rng a(99), b(99);
    CHECK(sample_rate(a, c) == sample_rate(b, c));
  }
}

TEST_CASE("mask_budget uses floor") {
  CHECK(mask_budget(10, 0.5) == 5);
  CHECK(mask_budget(20, 0.15) == 3);
  CHECK(mask_budget(7, 0.0) == 0);
  CHECK(mask_budget(7, 1.0) == 7);
  CHECK_THROWS_AS(mask_budget(7, 1.2), Error);
  CHECK_THROWS_AS(mask_budget(7, -0.1), Error);
}

TEST_CASE("random_mask_plan") {
  Rng rng(3);
  const auto p = random_mask_plan(10, 0.5, rng);
  check_plan_shape(p, 10, 0.5);
  CHECK(p.rand_indices.size() == 5);
  CHECK(p.struct_indices.empty());
  CHECK(p.span_sizes.empty());
  CHECK(random_mask_plan(10, 0.0, rng).size() == 0);
  CHECK(random_mask_plan(20, 0.15, rng).size() == 3);
  CHECK_THROWS_AS(random_mask_plan(10, 2.0, rng), Error);
}

TEST_CASE("bucket plan on a three-clique draws every mask from the clique") {
  const auto g = ContactMap::from_edges(std::vector<bool>(6, true), 7.0, {{0, 1}, {0, 2}, {1, 2}});
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(seed);
    const auto p = bucket_mask_plan(6, g, 0.5, 0.0, rng);
    CHECK(p.struct_indices == std::vector<std::size_t>{0, 1, 2});
    CHECK(p.rand_indices.empty());
    CHECK(p.span_sizes == std::vector<std::size_t>{3});
    CHECK(p.struct_shortfall == 0);
  }
}

TEST_CASE("bucket plan degenerate cases") {
  Rng rng(4);
  SUBCASE("lambda one has no structural phase") {
    const auto g = fixtures::random_graph(rng, 40, 0.2);
    const auto p = bucket_mask_plan(40, g, 0.5, 1.0, rng);
    CHECK(p.struct_indices.empty());
    CHECK(p.span_sizes.empty());
    CHECK(p.rand_indices.size() == 20);
  }
  SUBCASE("empty graph transfers the whole structural quota") {
    const auto p = bucket_mask_plan(40, empty_graph(40), 0.5, 0.2, rng);
    CHECK(p.struct_indices.empty());
    CHECK(p.struct_shortfall == 16);
    CHECK(p.rand_indices.size() == 20);
  }
  SUBCASE("all-remaining seed pool uses isolated positions") {
    const auto p = bucket_mask_plan(40, empty_graph(40), 0.5, 0.0, rng, SeedPool::AllRemaining);
    CHECK(p.struct_indices.size() == 20);
    CHECK(p.span_sizes == std::vector<std::size_t>(20, 1));
    CHECK(p.struct_shortfall == 0);
  }
  SUBCASE("mismatched graph length is a contract error") {
    CHECK_THROWS_AS(bucket_mask_plan(10, empty_graph(9), 0.5, 0.2, rng), Error);
  }
}

TEST_CASE("plans are exact, disjoint and in range across fuzzed inputs") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = 1 + rng.uniform_index(120);
    const double rate = rng.uniform01();
    const double lambda = rng.uniform01();
    const auto g = fixtures::random_graph(rng, n, 0.15 * rng.uniform01());
    check_plan_shape(random_mask_plan(n, rate, rng), n, rate);
    const auto b = bucket_mask_plan(n, g, rate, lambda, rng);
    check_plan_shape(b, n, rate);
    std::size_t spans = 0;
    for (auto k : b.span_sizes) spans += k;
    CHECK(spans == b.struct_indices.size());
    CHECK(b.struct_indices.size() + b.struct_shortfall ==
          static_cast<std::size_t>(std::floor(static_cast<double>(b.size()) * (1.0 - lambda))));
    check_plan_shape(gm_span_mask_plan(n, g, rate, lambda, rng), n, rate);
  }
}

TEST_CASE("gm-span runs match the paired bucket span sizes") {
  Rng graph_rng(6);
  const auto g = fixtures::random_graph(graph_rng, 80, 0.1);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng a(seed), b(seed);
    const auto bucket = bucket_mask_plan(80, g, 0.6, 0.2, a);
    const auto span = gm_span_mask_plan(80, g, 0.6, 0.2, b);
    CHECK(span.size() == bucket.size());
    CHECK(span.span_sizes == bucket.span_sizes);

    std::vector<std::size_t> run_lengths;
    std::vector<std::size_t> covered;
    for (const auto& s : span.spans) {
      run_lengths.push_back(s.length);
      for (std::size_t k = 0; k < s.length; ++k) covered.push_back(s.start + k);
    }
    auto expected = bucket.span_sizes;
    std::sort(run_lengths.begin(), run_lengths.end());
    std::sort(expected.begin(), expected.end());
    CHECK(run_lengths == expected);
    std::sort(covered.begin(), covered.end());
    CHECK(covered == span.struct_indices);
  }
}

TEST_CASE("gm-span single run of three on length ten") {
  const auto g = ContactMap::from_edges(std::vector<bool>(10, true), 7.0, {{0, 5}, {0, 8}});
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng a(seed), b(seed);
    const auto bucket = bucket_mask_plan(10, g, 0.3, 0.0, a);
    if (bucket.span_sizes != std::vector<std::size_t>{3}) continue;
    ++checked;
    const auto span = gm_span_mask_plan(10, g, 0.3, 0.0, b);
    REQUIRE(span.spans.size() == 1);
    CHECK(span.spans[0].length == 3);
    const auto s = span.spans[0].start;
    CHECK(span.struct_indices == std::vector<std::size_t>{s, s + 1, s + 2});
  }
  CHECK(checked > 0);
}

TEST_CASE("gm-span is deterministic per seed") {
  Rng graph_rng(8);
  const auto g = fixtures::random_graph(graph_rng, 50, 0.1);
  Rng a(21), b(21);
  CHECK(gm_span_mask_plan(50, g, 0.5, 0.2, a) == gm_span_mask_plan(50, g, 0.5, 0.2, b));
}

TEST_CASE("every position is reachable with lambda above zero") {
  Rng graph_rng(9);
  const auto g = fixtures::random_graph(graph_rng, 50, 0.03);
  MaskConfig config;
  std::vector<std::size_t> hits(50, 0);
  Rng rng(10);
  for (int i = 0; i < 10000; ++i) {
    const auto p = bucket_mask_plan(50, g, sample_rate(rng, config), config.lambda, rng);
    for (auto pos : p.masked()) ++hits[pos];
  }
  for (auto h : hits) CHECK(h > 0);
}

TEST_CASE("degenerate bucket plans match random plans in distribution") {
  const std::size_t n = 30;
  Rng graph_rng(11);
  const auto g = fixtures::random_graph(graph_rng, n, 0.2);
  const auto empty = empty_graph(n);
  std::vector<std::size_t> random_counts(n, 0), lambda_counts(n, 0), empty_counts(n, 0);
  Rng rng(12);
  for (int i = 0; i < 4000; ++i) {
    for (auto p : random_mask_plan(n, 0.3, rng).masked()) ++random_counts[p];
    for (auto p : bucket_mask_plan(n, g, 0.3, 1.0, rng).masked()) ++lambda_counts[p];
    for (auto p : bucket_mask_plan(n, empty, 0.3, 0.2, rng).masked()) ++empty_counts[p];
  }
  CHECK(stats::chi_square_homogeneity(lambda_counts, random_counts).p_value > 0.01);
  CHECK(stats::chi_square_homogeneity(empty_counts, random_counts).p_value > 0.01);
}

TEST_CASE("bucket plans enrich masked contact pairs") {
  Rng graph_rng(13);
  const auto g = fixtures::random_graph(graph_rng, 100, 0.1);
  Rng rng(14);
  std::vector<double> bucket, random;
  for (int i = 0; i < 300; ++i) {
    if (auto f = stats::masked_pair_contact_fraction(bucket_mask_plan(100, g, 0.3, 0.2, rng).masked(), g)) {
      bucket.push_back(*f);
    }
    if (auto f = stats::masked_pair_contact_fraction(random_mask_plan(100, 0.3, rng).masked(), g)) {
      random.push_back(*f);
    }
  }
  const auto cmp = stats::compare_means(bucket, random);
  CHECK(cmp.mean_a > cmp.mean_b);
  CHECK(cmp.p_greater < 0.001);
}

TEST_CASE("apply_corruption") {
  const std::string tokens = sequence_of(12);
  SUBCASE("empty plan is the identity") {
    MaskPlan plan;
    plan.length = tokens.size();
    Rng rng(1);
    const auto c = apply_corruption(tokens, plan, CorruptionPolicy{}, rng);
    CHECK(c.corrupted == tokens);
    CHECK(c.targets.empty());
    CHECK(c.actions.empty());
  }
  SUBCASE("forced mask policy") {
    Rng rng(2);
    const auto plan = random_mask_plan(tokens.size(), 1.0, rng);
    CorruptionPolicy policy;
    policy.mask_p = 1.0;
    policy.random_p = 0.0;
    policy.keep_p = 0.0;
    const auto c = apply_corruption(tokens, plan, policy, rng);
    CHECK(c.corrupted == std::string(tokens.size(), '#'));
    REQUIRE(c.targets.size() == tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) CHECK(c.targets[i] == Target{i, tokens[i]});
  }
  SUBCASE("untouched positions pass through and targets hold originals") {
    Rng rng(3);
    const auto plan = random_mask_plan(tokens.size(), 0.5, rng);
    const auto c = apply_corruption(tokens, plan, CorruptionPolicy{}, rng);
    const auto masked = plan.masked();
    REQUIRE(c.actions.size() == masked.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!std::binary_search(masked.begin(), masked.end(), i)) CHECK(c.corrupted[i] == tokens[i]);
    }
    for (std::size_t k = 0; k < masked.size(); ++k) {
      CHECK(c.targets[k].pos == masked[k]);
      CHECK(c.targets[k].token == tokens[masked[k]]);
      const auto& a = c.actions[k];
      CHECK(a.pos == masked[k]);
      if (a.kind == ActionKind::Mask) CHECK(c.corrupted[a.pos] == '#');
      if (a.kind == ActionKind::Keep) CHECK(c.corrupted[a.pos] == tokens[a.pos]);
      if (a.kind == ActionKind::Random) {
        CHECK(c.corrupted[a.pos] == a.replacement);
        CHECK(kStandardAminoAcids.find(a.replacement) != std::string_view::npos);
      }
    }
  }
  SUBCASE("length mismatch is a contract error") {
    Rng rng(4);
    const auto plan = random_mask_plan(5, 0.5, rng);
    CHECK_THROWS_AS(apply_corruption(tokens, plan, CorruptionPolicy{}, rng), Error);
  }
}

TEST_CASE("corruption action fractions") {
  const std::string tokens = sequence_of(1000);
  Rng rng(15);
  std::size_t counts[3] = {0, 0, 0};
  std::size_t total = 0;
  const auto plan = random_mask_plan(tokens.size(), 1.0, rng);
  for (int batch = 0; batch < 100; ++batch) {
    for (const auto& a : apply_corruption(tokens, plan, CorruptionPolicy{}, rng).actions) {
      ++counts[static_cast<int>(a.kind)];
      ++total;
    }
  }
  REQUIRE(total == 100000);
  const double n = static_cast<double>(total);
  CHECK(std::abs(counts[0] / n - 0.8) < 0.005);
  CHECK(std::abs(counts[1] / n - 0.1) < 0.005);
  CHECK(std::abs(counts[2] / n - 0.1) < 0.005);
}

TEST_CASE("apply_actions replays draw_actions") {
  const std::string tokens = sequence_of(40);
  Rng a(16), b(16);
  const auto plan = random_mask_plan(tokens.size(), 0.4, a);
  const auto direct = apply_corruption(tokens, plan, CorruptionPolicy{}, a);
  random_mask_plan(tokens.size(), 0.4, b);
  const auto actions = draw_actions(plan, CorruptionPolicy{}, b);
  const auto replay = apply_actions(tokens, plan.length, actions, '#');
  CHECK(replay.corrupted == direct.corrupted);
  CHECK(replay.targets == direct.targets);
  CHECK(replay.actions == direct.actions);
}

TEST_CASE("stream seeds are distinct across epochs and ordinals") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t e = 0; e < 20; ++e) {
    for (std::uint64_t o = 0; o < 50; ++o) seen.insert(stream_seed(7, e, o));
  }
  CHECK(seen.size() == 1000);
  CHECK(stream_seed(7, 1, 2) != stream_seed(7, 2, 1));
}
