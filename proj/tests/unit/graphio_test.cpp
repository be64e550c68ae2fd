#include <gtest/gtest.h>

#include <json.hpp>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fused3s/bsb.hpp"
#include "fused3s/error.hpp"
#include "fused3s/graphio.hpp"

namespace fused3s {
namespace {

using Entries = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

std::uint64_t bitmap_popcount(const BsbMatrix& b) {
  std::uint64_t total = 0;
  for (auto byte : b.bitmaps()) total += static_cast<std::uint64_t>(std::popcount(byte));
  return total;
}

TEST(MatrixMarket, PatternIndexShift) {
  const auto m = parse_matrix_market(
      "%%MatrixMarket matrix coordinate pattern general\n"
      "% comment\n"
      "3 3 2\n"
      "1 1\n"
      "2 3\n");
  EXPECT_EQ(m.n_rows, 3u);
  EXPECT_EQ(m.n_cols, 3u);
  EXPECT_EQ(m.entries, (Entries{{0, 0}, {1, 2}}));
}

TEST(MatrixMarket, SymmetricExpansionAndValuesDropped) {
  const auto m = parse_matrix_market(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "3 3 2\n"
      "2 1 0.5\n"
      "3 3 -1.0\n");
  EXPECT_EQ(m.entries, (Entries{{0, 1}, {1, 0}, {2, 2}}));
}

TEST(MatrixMarket, DuplicatesMerged) {
  const auto m = parse_matrix_market(
      "%%MatrixMarket matrix coordinate integer general\n2 2 3\n1 2 4\n1 2 5\n2 2 1\n");
  EXPECT_EQ(m.entries, (Entries{{0, 1}, {1, 1}}));
}

TEST(MatrixMarket, ErrorsCarryLineNumbers) {
  try {
    parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n3 3 1\n4 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n"),
               ParseError);
  EXPECT_THROW(parse_matrix_market("not a header\n"), ParseError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 1\n"),
               ParseError);
  EXPECT_THROW(parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 x\n"),
               ParseError);
}

TEST(MatrixMarket, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "fused3s_graphio_test.mtx";
  {
    std::ofstream out(path);
    out << "%%MatrixMarket matrix coordinate pattern symmetric\n4 4 2\n2 1\n4 3\n";
  }
  EXPECT_EQ(load_matrix_market(path).entries, (Entries{{0, 1}, {1, 0}, {2, 3}, {3, 2}}));
  std::filesystem::remove(path);
  EXPECT_THROW(load_matrix_market(path), IoError);
}

TEST(EdgeList, Examples) {
  EXPECT_EQ(parse_edge_list("0 1\n", {true, false, {}}).entries, (Entries{{0, 1}, {1, 0}}));
  const auto loops = parse_edge_list("", {false, true, 3u});
  EXPECT_EQ(loops.n_rows, 3u);
  EXPECT_EQ(loops.entries, (Entries{{0, 0}, {1, 1}, {2, 2}}));
  EXPECT_EQ(parse_edge_list("0 1\n0 1\n").entries, (Entries{{0, 1}}));
}

TEST(EdgeList, CommentsInferredSizeAndErrors) {
  const auto m = parse_edge_list("# header\n% other\n4 2\n\n  1\t0\n");
  EXPECT_EQ(m.n_rows, 5u);
  EXPECT_EQ(m.entries, (Entries{{1, 0}, {4, 2}}));
  try {
    parse_edge_list("0 1\n1 two\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_edge_list("0 1 2\n"), ParseError);
  EXPECT_THROW(parse_edge_list("0 -1\n"), ParseError);
  EXPECT_THROW(parse_edge_list("0 5\n", {false, false, 3u}), ValidationError);
}

TEST(Synthetic, UniformZeroDensityIsEmpty) {
  SyntheticSpec spec;
  spec.density = 0.0;
  const auto m = generate_synthetic(spec);
  EXPECT_EQ(m.n_rows, 64u);
  EXPECT_TRUE(m.entries.empty());
}

TEST(Synthetic, BatchedBlocksAreBlockDiagonal) {
  const auto spec = parse_synthetic_spec("batched_blocks:components=3,size=4,seed=5");
  const auto m = generate_synthetic(spec);
  EXPECT_EQ(m.n_rows, 12u);
  EXPECT_EQ(m.entries.size(), 48u);
  for (const auto& [i, j] : m.entries) EXPECT_EQ(i / 4, j / 4);
}

TEST(Synthetic, BatchedComponentsStayInsideTheirRowWindows) {
  const auto m = generate_synthetic(parse_synthetic_spec("batched:components=6,size=32,intra=0.3,seed=9"));
  const auto b = build_bsb(m, 16, 8);
  for (std::uint32_t rw = 0; rw < b.num_rw(); ++rw) {
    const std::uint32_t component = rw * 16 / 32;
    for (auto col : b.columns(rw)) ASSERT_EQ(col / 32, component);
  }
}

TEST(Synthetic, DeterministicPerSeed) {
  for (const char* text : {"uniform:n=100,density=0.1,seed=3", "power_law:n=300,m=3,seed=3",
                           "batched_blocks:components=5,min_size=3,max_size=20,intra=0.5,seed=3"}) {
    const auto spec = parse_synthetic_spec(text);
    EXPECT_EQ(generate_synthetic(spec), generate_synthetic(spec)) << text;
    auto other = spec;
    other.seed = 4;
    EXPECT_NE(generate_synthetic(spec), generate_synthetic(other)) << text;
  }
}

TEST(Synthetic, PowerLawIsSymmetricAndIrregular) {
  const auto pl = generate_synthetic(parse_synthetic_spec("power_law:n=1000,m=4,seed=7"));
  EXPECT_EQ(pl.n_rows, 1000u);
  const Entries& e = pl.entries;
  for (const auto& [i, j] : e) {
    ASSERT_TRUE(std::binary_search(e.begin(), e.end(), std::make_pair(j, i)));
    ASSERT_NE(i, j);
  }
  SyntheticSpec uniform;
  uniform.n = 1000;
  uniform.seed = 7;
  uniform.density = static_cast<double>(pl.nnz()) / (1000.0 * 1000.0);
  const auto u = generate_synthetic(uniform);
  EXPECT_GT(compute_stats(pl, 16, 8).tcb_per_rw_cv, compute_stats(u, 16, 8).tcb_per_rw_cv);
}

TEST(Synthetic, SpecParsingErrors) {
  EXPECT_THROW(parse_synthetic_spec("ring:n=4"), ValidationError);
  EXPECT_THROW(parse_synthetic_spec("uniform:n"), ValidationError);
  EXPECT_THROW(parse_synthetic_spec("uniform:bogus=1"), ValidationError);
  EXPECT_THROW(parse_synthetic_spec("uniform:n=abc"), ValidationError);
  SyntheticSpec bad;
  bad.density = 1.5;
  EXPECT_THROW(generate_synthetic(bad), ValidationError);
  bad = {};
  bad.kind = SyntheticKind::power_law;
  bad.n = 3;
  bad.attach = 4;
  EXPECT_THROW(generate_synthetic(bad), ValidationError);
  bad = {};
  bad.kind = SyntheticKind::batched_blocks;
  bad.min_size = 8;
  bad.max_size = 4;
  EXPECT_THROW(generate_synthetic(bad), ValidationError);
}

TEST(Stats, Identity16) {
  const auto s = compute_stats(identity_coo(16), 16, 8);
  EXPECT_EQ(s.num_rw, 1u);
  EXPECT_EQ(s.total_tcbs, 2u);
  EXPECT_EQ(s.nnz, 16u);
  EXPECT_EQ(s.tcb_per_rw_avg, 2.0);
  EXPECT_EQ(s.tcb_per_rw_cv, 0.0);
  EXPECT_EQ(s.nnz_per_tcb_avg, 8.0);
  EXPECT_EQ(s.nnz_per_tcb_cv, 0.0);
}

TEST(Stats, EmptyMatrix) {
  const auto s = compute_stats(CooMatrix{64, 64, {}}, 16, 8);
  EXPECT_EQ(s.tcb_per_rw_avg, 0.0);
  EXPECT_EQ(s.nnz_per_tcb_avg, 0.0);
  EXPECT_EQ(s.tcb_per_rw_cv, 0.0);
  for (const auto& d : s.deciles) {
    EXPECT_EQ(d.min, 0u);
    EXPECT_EQ(d.max, 0u);
  }
}

TEST(Stats, HandComputedCvAndDeciles) {
  // RW0: 3 TCBs of 8, 8, 1 nnz. RW1: empty. RW2: 1 TCB of 2 nnz.
  CooMatrix m{48, 48, {}};
  for (std::uint32_t j = 0; j < 17; ++j) m.entries.emplace_back(j % 8, j);
  m.entries.emplace_back(32, 40);
  m.entries.emplace_back(33, 41);
  const auto s = compute_stats(m, 16, 8);
  EXPECT_EQ(s.num_rw, 3u);
  EXPECT_EQ(s.total_tcbs, 4u);
  EXPECT_DOUBLE_EQ(s.tcb_per_rw_avg, 4.0 / 3.0);
  // population sd of {3, 0, 1}
  EXPECT_DOUBLE_EQ(s.tcb_per_rw_cv, std::sqrt((25.0 / 9 + 16.0 / 9 + 1.0 / 9) / 3) / (4.0 / 3.0));
  EXPECT_DOUBLE_EQ(s.nnz_per_tcb_avg, 19.0 / 4.0);
  // Three RWs: deciles 0..2 hold one RW each (sorted 0, 1, 3), the rest are empty.
  EXPECT_EQ(s.deciles[0].size, 1u);
  EXPECT_EQ(s.deciles[2].max, 3u);
  EXPECT_EQ(s.deciles[3].size, 0u);

  const auto skipped = compute_stats(m, 16, 8, {false});
  EXPECT_EQ(skipped.num_rw, 2u);
  EXPECT_DOUBLE_EQ(skipped.tcb_per_rw_avg, 2.0);
}

TEST(Stats, InvariantsOnGeneratedGraphs) {
  for (const char* text : {"uniform:n=500,density=0.02,seed=11", "power_law:n=800,m=5,seed=12",
                           "batched_blocks:components=20,min_size=5,max_size=60,intra=0.4,seed=13"}) {
    const auto m = generate_synthetic(parse_synthetic_spec(text));
    const auto b = build_bsb(m, 16, 8);
    EXPECT_EQ(bitmap_popcount(b), m.nnz()) << text;

    const auto s = compute_stats(m, 16, 8);
    std::uint64_t covered = 0;
    for (std::size_t i = 0; i < 10; ++i) {
      covered += s.deciles[i].size;
      if (s.deciles[i].size) {
        EXPECT_LE(s.deciles[i].min, s.deciles[i].max);
      }
      if (i + 1 == 10) continue;
      if (s.deciles[i + 1].size) {
        EXPECT_LE(s.deciles[i].max, s.deciles[i + 1].min);
      }
      EXPECT_GE(s.deciles[i].size, s.deciles[i + 1].size);
      EXPECT_LE(s.deciles[i].size - s.deciles[i + 1].size, 1u);
    }
    EXPECT_EQ(covered, s.num_rw);

    // Reordering row windows leaves the structure, and so the statistics, alone.
    const auto reordered = to_coo(reorder_row_windows(b));
    const auto s2 = compute_stats(reordered, 16, 8);
    EXPECT_EQ(s2.tcb_per_rw_avg, s.tcb_per_rw_avg);
    EXPECT_EQ(s2.nnz_per_tcb_cv, s.nnz_per_tcb_cv);
  }
}

TEST(Stats, JsonAndTableOutput) {
  const auto s = compute_stats(identity_coo(16), 16, 8);
  const auto j = nlohmann::json::parse(stats_to_json(s, "eye"));
  EXPECT_EQ(j.at("name"), "eye");
  EXPECT_EQ(j.at("tcb_per_rw").at("avg"), 2.0);
  EXPECT_EQ(j.at("nnz_per_tcb").at("avg"), 8.0);
  EXPECT_EQ(j.at("deciles").size(), 10u);
  const auto table = stats_to_table(s, "eye");
  EXPECT_NE(table.find("eye"), std::string::npos);
  EXPECT_NE(table.find("Decile"), std::string::npos);
}

}  // namespace
}  // namespace fused3s
