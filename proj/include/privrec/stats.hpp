/*
 * Copyright 2026 The privrec Authors.
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

// Small statistics toolkit for experiment summaries.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "privrec/errors.hpp"

namespace privrec::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1 denominator).
inline double stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

/// Nearest-rank percentile, q in [0, 1].
inline double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double pos = std::ceil(q * static_cast<double>(xs.size()));
  const std::size_t idx = pos < 1.0 ? 0 : static_cast<std::size_t>(pos) - 1;
  return xs[std::min(idx, xs.size() - 1)];
}

/// Ranks starting at 1, ties get the average rank.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&xs](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("pearson needs two equal-length samples");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

struct CorrelationTest {
  double rho = 0.0;
  double p_greater = 1.0;  // one-sided p-value for rho > 0
};

/// Spearman rank correlation with a one-sided p-value from the t approximation
/// t = rho * sqrt((n - 2) / (1 - rho^2)) on n - 2 degrees of freedom.
inline CorrelationTest spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  CorrelationTest out;
  out.rho = pearson(rx, ry);
  const double n = static_cast<double>(x.size());
  if (n < 3) return out;
  if (out.rho >= 1.0) {
    out.p_greater = 0.0;
    return out;
  }
  const double t = out.rho * std::sqrt((n - 2.0) / (1.0 - out.rho * out.rho));
  boost::math::students_t dist(n - 2.0);
  out.p_greater = boost::math::cdf(boost::math::complement(dist, t));
  return out;
}

struct PairedTest {
  double mean_difference = 0.0;
  double t = 0.0;
  double p_greater = 1.0;  // one-sided p-value for mean(a - b) > 0
};

inline PairedTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw UsageError("paired test needs two equal-length samples of size >= 2");
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  PairedTest out;
  out.mean_difference = mean(d);
  const double sd = stddev(d);
  if (sd == 0.0) {
    out.t = out.mean_difference > 0 ? INFINITY : (out.mean_difference < 0 ? -INFINITY : 0.0);
    out.p_greater = out.mean_difference > 0 ? 0.0 : (out.mean_difference < 0 ? 1.0 : 0.5);
    return out;
  }
  const double n = static_cast<double>(d.size());
  out.t = out.mean_difference / (sd / std::sqrt(n));
  boost::math::students_t dist(n - 1.0);
  out.p_greater = boost::math::cdf(boost::math::complement(dist, out.t));
  return out;
}

}  // namespace privrec::stats
