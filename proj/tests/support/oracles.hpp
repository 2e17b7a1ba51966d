#pragma once

// Reference implementations the library is checked against. Kept
// deliberately naive.

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using rational = boost::multiprecision::cpp_rational;

/// Textbook full-matrix Levenshtein DP.
inline std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

/// |100 * num/den - target| <= tol, exactly.
inline bool pct_matches(std::int64_t num, std::int64_t den, const rational& target, const rational& tol) {
  if (den == 0) return false;
  rational v = rational(100 * num, den) - target;
  return (v < 0 ? -v : v) <= tol;
}

struct Counts {
  std::int64_t tp, fn, fp, tn;
};

/// Every (tp, fn, fp, tn) with tp + fn = n_pass and fp + tn = n_fail whose
/// accuracy, sensitivity and specificity round to the published figures
/// (published to one decimal, so half a unit of the last digit).
inline std::vector<Counts> reconstruct(std::int64_t n_pass, std::int64_t n_fail, const rational& accuracy,
                                       const rational& sensitivity, const rational& specificity) {
  const rational tol(1, 20);
  std::vector<Counts> out;
  for (std::int64_t tp = 0; tp <= n_pass; ++tp)
    for (std::int64_t tn = 0; tn <= n_fail; ++tn) {
      Counts c{tp, n_pass - tp, n_fail - tn, tn};
      if (pct_matches(c.tp + c.tn, n_pass + n_fail, accuracy, tol) && pct_matches(c.tp, n_pass, sensitivity, tol) &&
          pct_matches(c.tn, n_fail, specificity, tol))
        out.push_back(c);
    }
  return out;
}

/// Every (one_or_more, uninvolved, non_existent) over n_faulty reproducing
/// the three published percentages; non_existent is over uninvolved.
struct LabelCounts {
  std::int64_t one_or_more, uninvolved, non_existent;
};

inline std::vector<LabelCounts> reconstruct_labels(std::int64_t n_faulty, const rational& one_or_more,
                                                   const rational& uninvolved, const rational& non_existent) {
  const rational tol(1, 20);
  std::vector<LabelCounts> out;
  for (std::int64_t a = 0; a <= n_faulty; ++a)
    for (std::int64_t b = 0; b <= n_faulty; ++b)
      for (std::int64_t c = 0; c <= b; ++c)
        if (pct_matches(a, n_faulty, one_or_more, tol) && pct_matches(b, n_faulty, uninvolved, tol) &&
            pct_matches(c, b, non_existent, tol))
          out.push_back({a, b, c});
  return out;
}

}  // namespace oracle
