/*
 * Copyright 2026 The rfxg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "rfxg/error.hpp"
#include "rfxg/image_io.hpp"
#include "rfxg/ontology.hpp"
#include "rfxg/synthetic.hpp"

namespace rfxg {
namespace {

TEST(SyntheticTaxonomy, NamesAndValidation) {
  SyntheticTaxonomy tax;
  EXPECT_EQ(tax.class_count(), 20u);
  EXPECT_EQ(tax.class_name(0), "round_red");
  EXPECT_EQ(tax.class_name(7), "polygon_blue");
  EXPECT_EQ(tax.group_name(19), "cross");
  EXPECT_EQ(tax.family(12), ShapeFamily::kStripe);
  EXPECT_NO_THROW(tax.validate());
  EXPECT_THROW((SyntheticTaxonomy{1, 5, 32, 0}.validate()), InvalidArgument);
  EXPECT_THROW((SyntheticTaxonomy{5, 5, 32, 0}.validate()), InvalidArgument);
  EXPECT_THROW((SyntheticTaxonomy{4, 4, 32, 0}.validate()), InvalidArgument);
  EXPECT_THROW((SyntheticTaxonomy{4, 9, 32, 0}.validate()), InvalidArgument);
  EXPECT_THROW((SyntheticTaxonomy{4, 5, 8, 0}.validate()), InvalidArgument);
}

TEST(SyntheticTaxonomy, HierarchyTextParses) {
  SyntheticTaxonomy tax{3, 6, 32, 0};
  const Hierarchy h = parse_hierarchy(tax.hierarchy_text());
  EXPECT_EQ(h.class_count(), 18u);
  EXPECT_EQ(h.node_count(), 18u + 3u + 1u);
  EXPECT_EQ(h.class_name(17), tax.class_name(17));
}

TEST(GenerateDataset, DeterministicAndOrdered) {
  SyntheticTaxonomy tax;
  const auto a = generate_dataset(tax, 3, 11);
  const auto b = generate_dataset(tax, 3, 11);
  const auto c = generate_dataset(tax, 3, 12);
  ASSERT_EQ(a.size(), 60u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].label, i / 3);
    EXPECT_EQ(a[i].image, b[i].image);
    EXPECT_NE(a[i].image, c[i].image);
    EXPECT_EQ(a[i].image.height(), 32u);
    EXPECT_EQ(a[i].image.channels(), 3u);
  }
  EXPECT_THROW(generate_dataset(tax, 0, 1), InvalidArgument);
}

TEST(GenerateDataset, ClassMeansDiffer) {
  SyntheticTaxonomy tax;
  const auto data = generate_dataset(tax, 20, 3);
  std::vector<std::vector<double>> means(tax.class_count(),
                                         std::vector<double>(32 * 32 * 3, 0.0));
  for (const auto& ex : data) {
    for (std::size_t i = 0; i < ex.image.size(); ++i) means[ex.label][i] += ex.image.data()[i] / 20;
  }
  for (std::size_t a = 0; a < means.size(); ++a) {
    for (std::size_t b = a + 1; b < means.size(); ++b) {
      double d = 0.0;
      for (std::size_t i = 0; i < means[a].size(); ++i) d += std::abs(means[a][i] - means[b][i]);
      EXPECT_GT(d / static_cast<double>(means[a].size()), 0.01) << a << " vs " << b;
    }
  }
}

TEST(RenderSample, RejectsUnknownClass) {
  SyntheticTaxonomy tax;
  EXPECT_THROW(render_sample(tax, 20, 0), InvalidArgument);
}

TEST(Dataset, ExportImportRoundTrip) {
  SyntheticTaxonomy tax{2, 5, 16, 0};
  const auto data = generate_dataset(tax, 2, 5);
  const auto dir = std::filesystem::temp_directory_path() / "rfxg_synthetic_test";
  std::filesystem::remove_all(dir);
  export_dataset(dir, data);
  EXPECT_TRUE(std::filesystem::exists(dir / "img_00019.ppm"));
  const auto back = import_dataset(dir);
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back[i].label, data[i].label);
    EXPECT_EQ(back[i].image, quantize_8bit(data[i].image));
  }
  std::filesystem::remove_all(dir);
  EXPECT_THROW(import_dataset(dir), FormatError);
}

}  // namespace
}  // namespace rfxg
