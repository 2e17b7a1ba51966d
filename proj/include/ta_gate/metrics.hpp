#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "ta_gate/error.hpp"
#include "ta_gate/feedback.hpp"
#include "ta_gate/sandbox.hpp"

namespace ta_gate::metrics {

/// Exact non-negative fraction, always kept in lowest terms with den > 0.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Ratio of(std::int64_t num, std::int64_t den);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  /// Percentage with `decimals` digits, rounded half up in exact arithmetic.
  std::string percent(int decimals = 1) const;

  friend Ratio operator+(const Ratio& a, const Ratio& b);
  friend Ratio operator-(const Ratio& a, const Ratio& b);
  bool operator==(const Ratio&) const = default;
};

using MaybeRatio = std::optional<Ratio>;

/// Ratio num/den, or nullopt (Undefined) when den == 0.
MaybeRatio ratio_or_undefined(std::int64_t num, std::int64_t den);
std::string percent_or_na(const MaybeRatio& r, int decimals = 1);
nlohmann::json to_json(const MaybeRatio& r);

struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fn + fp + tn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassificationMetrics {
  MaybeRatio accuracy;
  MaybeRatio sensitivity;
  MaybeRatio specificity;
};

ClassificationMetrics compute_metrics(const ConfusionMatrix& cm);

enum class Cell { TP, FN, FP, TN, Unparseable };

const char* to_string(Cell c);
Cell cell_from_string(std::string_view s);

Cell classify(bool asserts_ok, feedback::Verdict verdict);
inline Cell classify(const sandbox::ExecutionReport& execution, feedback::Verdict verdict) {
  return classify(execution.asserts_ok, verdict);
}

/// Levenshtein distance over code points (bit-parallel, any length).
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);
/// UTF-8 convenience overload; line endings are not touched.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// edit_distance(student, corrected) / max(1, length(student)) after
/// newline normalization; lengths in code points.
Ratio compute_cer(std::string_view student, std::string_view corrected);

class UndefinedBound : public Error {
 public:
  explicit UndefinedBound(const std::string& msg) : Error("UndefinedBound", msg) {}
};

struct OperationalBounds {
  Ratio erroneous_lower_bound;  // fp / (fp + tn)
  Ratio manual_eval_fraction;   // tn / total
};

OperationalBounds operational_bounds(const ConfusionMatrix& cm);

}  // namespace ta_gate::metrics
