#include "ta_gate/metrics.hpp"

#include <numeric>
#include <unordered_map>
#include <vector>

#include "ta_gate/text.hpp"

namespace ta_gate::metrics {

namespace {

using i128 = __int128;

Ratio reduce(i128 num, i128 den) {
  if (den == 0) throw Error("ArithmeticError", "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 a = num < 0 ? -num : num;
  i128 b = den;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  i128 g = a == 0 ? den : a;
  return Ratio{static_cast<std::int64_t>(num / g), static_cast<std::int64_t>(den / g)};
}

}  // namespace

Ratio Ratio::of(std::int64_t num, std::int64_t den) { return reduce(num, den); }

Ratio operator+(const Ratio& a, const Ratio& b) {
  return reduce(static_cast<i128>(a.num) * b.den + static_cast<i128>(b.num) * a.den,
                static_cast<i128>(a.den) * b.den);
}

Ratio operator-(const Ratio& a, const Ratio& b) {
  return reduce(static_cast<i128>(a.num) * b.den - static_cast<i128>(b.num) * a.den,
                static_cast<i128>(a.den) * b.den);
}

std::string Ratio::percent(int decimals) const {
  i128 scale = 100;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  bool negative = num < 0;
  i128 n = negative ? -static_cast<i128>(num) : static_cast<i128>(num);
  // round(n * scale / den), half up
  i128 scaled = (2 * n * scale + den) / (2 * static_cast<i128>(den));
  i128 unit = scale / 100;
  auto whole = static_cast<long long>(scaled / unit);
  auto frac = static_cast<long long>(scaled % unit);
  std::string out = (negative ? "-" : "") + std::to_string(whole);
  if (decimals > 0) {
    std::string f = std::to_string(frac);
    out += "." + std::string(static_cast<std::size_t>(decimals) - f.size(), '0') + f;
  }
  return out;
}

MaybeRatio ratio_or_undefined(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return Ratio::of(num, den);
}

std::string percent_or_na(const MaybeRatio& r, int decimals) { return r ? r->percent(decimals) : "NA"; }

nlohmann::json to_json(const MaybeRatio& r) {
  if (!r) return nullptr;
  return {{"num", r->num}, {"den", r->den}, {"percent", r->percent(1)}};
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  fn += o.fn;
  fp += o.fp;
  tn += o.tn;
  return *this;
}

ClassificationMetrics compute_metrics(const ConfusionMatrix& cm) {
  return {ratio_or_undefined(cm.tp + cm.tn, cm.total()), ratio_or_undefined(cm.tp, cm.tp + cm.fn),
          ratio_or_undefined(cm.tn, cm.tn + cm.fp)};
}

const char* to_string(Cell c) {
  switch (c) {
    case Cell::TP:
      return "TP";
    case Cell::FN:
      return "FN";
    case Cell::FP:
      return "FP";
    case Cell::TN:
      return "TN";
    case Cell::Unparseable:
      return "Unparseable";
  }
  return "Unparseable";
}

Cell cell_from_string(std::string_view s) {
  for (auto c : {Cell::TP, Cell::FN, Cell::FP, Cell::TN, Cell::Unparseable}) {
    if (s == to_string(c)) return c;
  }
  throw Error("RecordSyntax", "unknown cell: " + std::string(s));
}

Cell classify(bool asserts_ok, feedback::Verdict verdict) {
  using feedback::Verdict;
  if (verdict == Verdict::Unparseable) return Cell::Unparseable;
  if (asserts_ok) return verdict == Verdict::Correct ? Cell::TP : Cell::FN;
  return verdict == Verdict::Correct ? Cell::FP : Cell::TN;
}

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  // Common prefix and suffix never contribute edits.
  while (!a.empty() && !b.empty() && a.front() == b.front()) {
    a.remove_prefix(1);
    b.remove_prefix(1);
  }
  while (!a.empty() && !b.empty() && a.back() == b.back()) {
    a.remove_suffix(1);
    b.remove_suffix(1);
  }
  if (a.size() > b.size()) std::swap(a, b);
  if (a.empty()) return b.size();

  // Hyyro's bit-vector recurrence, blocked into 64-bit words over the
  // shorter string; `a` is the pattern, `b` the text.
  const std::size_t m = a.size();
  const std::size_t words = (m + 63) / 64;
  std::unordered_map<char32_t, std::vector<std::uint64_t>> peq;
  for (std::size_t i = 0; i < m; ++i) {
    auto& v = peq[a[i]];
    if (v.empty()) v.assign(words, 0);
    v[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  const std::vector<std::uint64_t> none(words, 0);
  std::vector<std::uint64_t> vp(words, ~std::uint64_t{0});
  std::vector<std::uint64_t> vn(words, 0);
  const std::uint64_t last = std::uint64_t{1} << ((m - 1) % 64);
  std::size_t dist = m;

  for (char32_t c : b) {
    auto it = peq.find(c);
    const auto& eq_words = it == peq.end() ? none : it->second;
    std::uint64_t hp_carry = 1;
    std::uint64_t hn_carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t eq = eq_words[w];
      std::uint64_t pv = vp[w];
      std::uint64_t mv = vn[w];
      std::uint64_t x = eq | hn_carry;
      std::uint64_t d0 = (((x & pv) + pv) ^ pv) | x | mv;
      std::uint64_t hp = mv | ~(d0 | pv);
      std::uint64_t hn = d0 & pv;
      std::uint64_t hp_in = hp_carry;
      std::uint64_t hn_in = hn_carry;
      if (w + 1 < words) {
        hp_carry = hp >> 63;
        hn_carry = hn >> 63;
      } else {
        hp_carry = (hp & last) != 0 ? 1 : 0;
        hn_carry = (hn & last) != 0 ? 1 : 0;
      }
      hp = (hp << 1) | hp_in;
      hn = (hn << 1) | hn_in;
      vp[w] = hn | ~(d0 | hp);
      vn[w] = hp & d0;
    }
    dist += hp_carry;
    dist -= hn_carry;
  }
  return dist;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  auto ua = text::decode_utf8(a);
  auto ub = text::decode_utf8(b);
  return edit_distance(std::u32string_view(ua), std::u32string_view(ub));
}

Ratio compute_cer(std::string_view student, std::string_view corrected) {
  auto s = text::decode_utf8(text::normalize_newlines(student));
  auto c = text::decode_utf8(text::normalize_newlines(corrected));
  auto d = edit_distance(std::u32string_view(s), std::u32string_view(c));
  auto len = std::max<std::size_t>(1, s.size());
  return Ratio::of(static_cast<std::int64_t>(d), static_cast<std::int64_t>(len));
}

OperationalBounds operational_bounds(const ConfusionMatrix& cm) {
  if (cm.fp + cm.tn == 0) throw UndefinedBound("erroneous-feedback lower bound needs fp + tn > 0");
  if (cm.total() == 0) throw UndefinedBound("manual-evaluation fraction needs a non-empty matrix");
  return {Ratio::of(cm.fp, cm.fp + cm.tn), Ratio::of(cm.tn, cm.total())};
}

}  // namespace ta_gate::metrics
