#include "oracles/naive_cooc.hpp"
#include "test_util.hpp"

#include "coocnet/cooc.hpp"

#include <algorithm>
#include <fstream>
#include <random>

using namespace coocnet;
using namespace coocnet::cooc;
using coocnet::testing::random_image;
using coocnet::testing::TempDir;

namespace {

CoOccConfig config(int dy, int dx, bool symmetric = false, int bins = 256) {
  CoOccConfig cfg;
  cfg.offset = {dy, dx};
  cfg.symmetric = symmetric;
  cfg.bins = bins;
  return cfg;
}

imaging::PixelImage constant_image(int width, int height, std::uint8_t value) {
  imaging::PixelImage img(width, height);
  std::fill(img.data().begin(), img.data().end(), value);
  return img;
}

}  // namespace

TEST(CoOccConfig, Validation) {
  EXPECT_NO_THROW(validate(CoOccConfig{}));
  EXPECT_ERRC(validate(config(0, 0)), InvalidConfig);
  EXPECT_ERRC(validate(config(0, 1, false, 0)), InvalidConfig);
  EXPECT_ERRC(validate(config(0, 1, false, 1)), InvalidConfig);
  EXPECT_ERRC(validate(config(0, 1, false, 100)), InvalidConfig);
  EXPECT_ERRC(validate(config(0, 1, false, 512)), InvalidConfig);
  for (int b = 2; b <= 256; b *= 2) EXPECT_NO_THROW(validate(config(0, 1, false, b)));
}

TEST(CooccurChannel, ConstantChannel) {
  const std::vector<std::uint8_t> data(4 * 5, 7);
  const auto m = cooccur_channel(ChannelView::dense(data, 4, 5), config(0, 1));
  EXPECT_EQ(m.at(7, 7), 16u);
  EXPECT_EQ(m.total(), 16u);
}

TEST(CooccurChannel, HandEnumerated) {
  const std::vector<std::uint8_t> data{0, 1, 2, 3};
  const auto m = cooccur_channel(ChannelView::dense(data, 2, 2), config(0, 1));
  EXPECT_EQ(m.at(0, 1), 1u);
  EXPECT_EQ(m.at(2, 3), 1u);
  EXPECT_EQ(m.total(), 2u);

  const auto v = cooccur_channel(ChannelView::dense(data, 2, 2), config(1, 0));
  EXPECT_EQ(v.at(0, 2), 1u);
  EXPECT_EQ(v.at(1, 3), 1u);
  EXPECT_EQ(v.total(), 2u);

  const auto neg = cooccur_channel(ChannelView::dense(data, 2, 2), config(-1, 1));
  EXPECT_EQ(neg.at(2, 1), 1u);
  EXPECT_EQ(neg.total(), 1u);
}

TEST(CooccurChannel, OffsetTooLarge) {
  const std::vector<std::uint8_t> data(3 * 4, 0);
  const auto view = ChannelView::dense(data, 3, 4);
  EXPECT_ERRC(cooccur_channel(view, config(0, 4)), OffsetTooLarge);
  EXPECT_ERRC(cooccur_channel(view, config(-3, 0)), OffsetTooLarge);
  EXPECT_NO_THROW(cooccur_channel(view, config(2, -3)));
}

TEST(CooccurChannel, MatchesNaiveOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> off(-2, 2);
  for (int n = 0; n < 200; ++n) {
    const auto img = random_image(16, 16, 5000 + n);
    int dy = 0;
    int dx = 0;
    while (dy == 0 && dx == 0) {
      dy = off(rng);
      dx = off(rng);
    }
    for (const bool symmetric : {false, true}) {
      const auto counts = cooccur_counts(img, config(dy, dx, symmetric));
      for (int c = 0; c < 3; ++c) {
        ASSERT_EQ(counts[c].counts, oracle::naive_cooccurrence(img, c, dy, dx, symmetric, 256))
            << "image " << n << " offset " << dy << "," << dx << " symmetric " << symmetric;
      }
    }
  }
}

TEST(CooccurChannel, MatchesNaiveOracleAtReducedBins) {
  for (const int bins : {2, 16, 64, 128}) {
    const auto img = random_image(12, 9, static_cast<std::uint64_t>(bins));
    const auto counts = cooccur_counts(img, config(1, -1, true, bins));
    for (int c = 0; c < 3; ++c) EXPECT_EQ(counts[c].counts, oracle::naive_cooccurrence(img, c, 1, -1, true, bins));
  }
}

TEST(CooccurChannel, CountSumInvariant) {
  const std::vector<Offset> offsets{{0, 1}, {1, 0}, {1, 1}, {0, 2}, {-2, 1}, {3, -2}};
  for (int n = 0; n < 20; ++n) {
    const int w = 8 + n;
    const int h = 30 - n;
    const auto img = random_image(w, h, 77 + n);
    for (const auto& o : offsets) {
      for (const bool symmetric : {false, true}) {
        const auto cfg = config(o.dy, o.dx, symmetric);
        const std::uint64_t expected =
            static_cast<std::uint64_t>(h - std::abs(o.dy)) * (w - std::abs(o.dx)) * (symmetric ? 2 : 1);
        EXPECT_EQ(expected_pair_count(h, w, cfg), expected);
        for (const auto& m : cooccur_counts(img, cfg)) EXPECT_EQ(m.total(), expected);
      }
    }
  }
}

TEST(CooccurChannel, SymmetricIsAsymmetricPlusTranspose) {
  for (int n = 0; n < 10; ++n) {
    const auto img = random_image(20, 15, 300 + n);
    const auto a = cooccur_counts(img, config(1, 2, false, 64));
    const auto s = cooccur_counts(img, config(1, 2, true, 64));
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < 64; ++i) {
        for (int j = 0; j < 64; ++j) ASSERT_EQ(s[c].at(i, j), a[c].at(i, j) + a[c].at(j, i));
      }
    }
  }
}

TEST(CooccurChannel, RowPermutationInvariance) {
  const auto img = random_image(24, 18, 11);
  std::vector<int> order(18);
  for (int i = 0; i < 18; ++i) order[i] = i;
  std::mt19937_64 rng(3);
  std::shuffle(order.begin(), order.end(), rng);
  imaging::PixelImage permuted(24, 18);
  for (int y = 0; y < 18; ++y) {
    for (int x = 0; x < 24; ++x) {
      for (int c = 0; c < 3; ++c) permuted.at(y, x, c) = img.at(order[y], x, c);
    }
  }
  EXPECT_EQ(cooccur_counts(img, config(0, 1)), cooccur_counts(permuted, config(0, 1)));
}

TEST(CooccurChannel, BinAggregation) {
  for (int n = 0; n < 50; ++n) {
    const auto img = random_image(16, 16, 900 + n);
    const auto fine = cooccur_counts(img, config(0, 1, false, 256));
    const auto coarse = cooccur_counts(img, config(0, 1, false, 128));
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < 128; ++i) {
        for (int j = 0; j < 128; ++j) {
          const auto block = fine[c].at(2 * i, 2 * j) + fine[c].at(2 * i + 1, 2 * j) + fine[c].at(2 * i, 2 * j + 1) +
                             fine[c].at(2 * i + 1, 2 * j + 1);
          ASSERT_EQ(coarse[c].at(i, j), block);
        }
      }
    }
  }
}

TEST(CooccurTensor, ConstantBlackImage) {
  const auto t = cooccur_tensor(constant_image(9, 6, 0), CoOccConfig{});
  ASSERT_EQ(t.size(), 3u * 256 * 256);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 256; ++i) {
      for (int j = 0; j < 256; ++j) ASSERT_EQ(t.at(c, i, j), (i == 0 && j == 0) ? 1.0f : 0.0f);
    }
  }
}

TEST(CooccurTensor, ShapeIndependentOfImageSize) {
  for (const auto& [w, h] : {std::pair{2, 2}, std::pair{31, 7}, std::pair{64, 48}}) {
    const auto t = cooccur_tensor(random_image(w, h, 1), config(0, 1, false, 32));
    EXPECT_EQ(t.bins, 32);
    EXPECT_EQ(t.size(), 3u * 32 * 32);
  }
}

TEST(CooccurTensor, RandomImagePairCount) {
  const auto img = random_image(32, 32, 8);
  for (const auto& m : cooccur_counts(img, CoOccConfig{})) EXPECT_EQ(m.total(), 32u * 31u);
}

TEST(CooccurTensor, NormalizationIsScaleOnly) {
  for (int n = 0; n < 10; ++n) {
    const auto img = random_image(40, 40, 60 + n);
    const auto cfg = config(0, 1, false, 16);
    const auto counts = cooccur_counts(img, cfg);
    const auto t = cooccur_tensor(img, cfg);
    for (int c = 0; c < 3; ++c) {
      const auto& raw = counts[c].counts;
      const auto raw_max = *std::max_element(raw.begin(), raw.end());
      const auto first = t.data.begin() + static_cast<std::ptrdiff_t>(c) * 256;
      const auto norm_argmax = std::max_element(first, first + 256) - first;
      const auto raw_argmax = std::max_element(raw.begin(), raw.end()) - raw.begin();
      EXPECT_EQ(norm_argmax, raw_argmax);
      EXPECT_EQ(*std::max_element(first, first + 256), 1.0f);
      for (std::size_t k = 0; k < raw.size(); ++k) {
        EXPECT_FLOAT_EQ(first[static_cast<std::ptrdiff_t>(k)], static_cast<float>(raw[k]) / raw_max);
      }
    }
  }
}

TEST(CooccurTensor, AllZeroChannelStaysZero) {
  std::array<CountMatrix, 3> counts;
  for (auto& m : counts) {
    m.bins = 4;
    m.counts.assign(16, 0);
  }
  counts[1].counts[5] = 3;
  const auto t = normalize(counts, Normalization::MaxOne);
  EXPECT_EQ(std::count(t.data.begin(), t.data.end(), 0.0f), 47);
  EXPECT_EQ(t.at(1, 1, 1), 1.0f);
}

TEST(BatchExtract, EmptyAndFailures) {
  const auto empty = batch_extract({}, CoOccConfig{});
  EXPECT_TRUE(empty.samples.empty());
  EXPECT_TRUE(empty.failures.empty());

  const std::vector<ImageRecord> bad{{"/definitely/not/here.png", Label::Gan, "x"}};
  const auto result = batch_extract(bad, CoOccConfig{});
  EXPECT_TRUE(result.samples.empty());
  ASSERT_EQ(result.failures.size(), 1u);
  EXPECT_EQ(result.failures[0].record_index, 0u);
  EXPECT_EQ(result.failures[0].path, "/definitely/not/here.png");
}

TEST(BatchExtract, WorkerCountIndependent) {
  TempDir dir;
  std::vector<ImageRecord> records;
  for (int i = 0; i < 100; ++i) {
    const auto path = dir / ("img" + std::to_string(i) + ".png");
    imaging::save_image(path, random_image(20 + i % 7, 16 + i % 5, 40 + i));
    records.push_back({path.string(), i % 2 ? Label::Gan : Label::Real, "c"});
  }
  records.insert(records.begin() + 50, ImageRecord{(dir / "missing.png").string(), Label::Real, "c"});
  const auto cfg = config(0, 1, false, 64);
  const auto one = batch_extract(records, cfg, {1, std::nullopt});
  const auto eight = batch_extract(records, cfg, {8, std::nullopt});
  ASSERT_EQ(one.samples.size(), 100u);
  ASSERT_EQ(eight.samples.size(), 100u);
  ASSERT_EQ(one.failures.size(), 1u);
  EXPECT_EQ(one.failures[0].record_index, 50u);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(one.samples[i].record_index, eight.samples[i].record_index);
    EXPECT_EQ(one.samples[i].label, records[one.samples[i].record_index].label);
    EXPECT_EQ(one.samples[i].tensor, eight.samples[i].tensor);
    EXPECT_EQ(one.samples[i].tensor, cooccur_tensor(imaging::load_image(records[one.samples[i].record_index].path), cfg));
  }
}

TEST(BatchExtract, JpegOption) {
  TempDir dir;
  const auto img = random_image(32, 32, 4);
  imaging::save_image(dir / "a.png", img);
  const std::vector<ImageRecord> records{{(dir / "a.png").string(), Label::Real, "c"}};
  const auto result = batch_extract(records, CoOccConfig{}, {1, 75});
  ASSERT_EQ(result.samples.size(), 1u);
  EXPECT_EQ(result.samples[0].tensor, cooccur_tensor(imaging::jpeg_recompress(img, 75), CoOccConfig{}));
}

TEST(TensorCache, RoundTrip) {
  TempDir dir;
  const auto cfg = config(-1, 2, true, 32);
  const auto t = cooccur_tensor(random_image(30, 30, 12), cfg);
  write_tensor_cache(dir / "t.cooc", t, cfg);
  const auto back = read_tensor_cache(dir / "t.cooc");
  EXPECT_EQ(back.tensor, t);
  EXPECT_EQ(back.offset, cfg.offset);
  EXPECT_TRUE(back.symmetric);

  std::filesystem::resize_file(dir / "t.cooc", 40);
  EXPECT_ANY_THROW(read_tensor_cache(dir / "t.cooc"));
  EXPECT_ERRC(read_tensor_cache(dir / "none.cooc"), FileNotFound);
}
