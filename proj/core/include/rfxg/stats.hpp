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

#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace rfxg {

// Two-sided paired Student t-test.
struct PairedTest {
  double t = 0.0;
  double p = 1.0;
  std::size_t degrees_of_freedom = 0;
  std::size_t n = 0;
  double mean_difference = 0.0;
  // Differences were all equal and nonzero: t is infinite and p is reported
  // as 0, printed as "<1e-12".
  bool degenerate = false;
};

// Tests mean(a - b) == 0. Throws DimensionError on a length mismatch and
// InvalidArgument when n < 2.
PairedTest paired_t_test(std::span<const double> a, std::span<const double> b);

// Fixed-width rendering of a p value; degenerate tests print "<1e-12".
std::string format_p_value(const PairedTest& test);

}  // namespace rfxg
