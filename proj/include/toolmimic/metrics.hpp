#pragma once

#include <string>
#include <vector>

#include "toolmimic/jsonio.hpp"

namespace toolmimic {

struct KeypointPair {
  std::string image_id;
  Vec2 gt{0.0, 0.0};    // annotated pixel
  Vec2 pred{0.0, 0.0};  // transferred pixel
};

struct KeypointPairSet {
  std::vector<KeypointPair> pairs;

  /// CSV with header image_id,gt_x,gt_y,pred_x,pred_y. Throws IoError /
  /// SchemaError (bad header, short row, non-finite pixel).
  static KeypointPairSet from_csv(const std::string& path);
  void write_csv(const std::string& path) const;
};

/// Mean Euclidean pixel distance over the pairs. Throws EmptySet.
double akd(const KeypointPairSet& pairs);

/// Fraction of pairs with distance <= threshold (ties count as correct).
/// Throws EmptySet; DegenerateConfiguration for threshold <= 0.
double ap_at(const KeypointPairSet& pairs, double threshold);

/// The four headline numbers at the standard pixel thresholds 15, 30, 45.
/// ap fields are fractions in [0, 1]; the CSV view prints percentages.
struct MetricsReport {
  double akd_px = 0.0;
  double ap15 = 0.0;
  double ap30 = 0.0;
  double ap45 = 0.0;

  static constexpr int kSchemaVersion = 1;

  Json to_json() const;  // raw doubles, lossless
  static MetricsReport from_json(const Json& j);

  /// Two-line table: header row, then akd and the three APs as percentages
  /// with two decimals (e.g. "18.54,51.33,85.78,94.44"). Throws IoError.
  void write_csv(const std::string& path) const;
  std::string csv_row() const;
};

MetricsReport evaluate_report(const KeypointPairSet& pairs);

}  // namespace toolmimic
