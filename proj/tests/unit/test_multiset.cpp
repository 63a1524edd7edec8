#include <gtest/gtest.h>

#include "lvlingam/multiset.hpp"

using namespace lvlingam;

TEST(Multiset, CountsAndOrder) {
  EXPECT_EQ(multiset_count(3, 4), 15u);
  EXPECT_EQ(multiset_count(5, 6), 210u);
  const auto all = multisets(3, 2);
  ASSERT_EQ(all.size(), 6u);
  EXPECT_EQ(all.front(), (IndexKey{0, 0}));
  EXPECT_EQ(all.back(), (IndexKey{2, 2}));
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
  EXPECT_EQ(canonical_key(std::vector<std::size_t>{2, 0, 1, 0}), (IndexKey{0, 0, 1, 2}));
}

TEST(Multiset, BellNumbers) {
  const std::size_t bell[] = {1, 1, 2, 5, 15, 52, 203};
  for (std::size_t n = 1; n <= 6; ++n) EXPECT_EQ(set_partitions(n).size(), bell[n]) << n;
}

TEST(Multiset, PartitionsWithoutSingletons) {
  const std::size_t expected[] = {0, 0, 1, 1, 4, 11, 41};
  for (std::size_t n = 2; n <= 6; ++n) {
    const auto& parts = partitions_without_singletons(n);
    EXPECT_EQ(parts.size(), expected[n]) << n;
    for (const auto& p : parts) {
      for (const auto& block : p) EXPECT_GE(block.size(), 2u);
    }
  }
}
