#include "toolmimic/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "toolmimic/errors.hpp"

namespace toolmimic {

namespace {

const char* kPairHeader = "image_id,gt_x,gt_y,pred_x,pred_y";

double parse_pixel(const std::string& field, const std::string& path) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw SchemaError(path + ": bad pixel value '" + field + "'");
  }
  if (used != field.size() || !std::isfinite(v))
    throw SchemaError(path + ": bad pixel value '" + field + "'");
  return v;
}

}  // namespace

KeypointPairSet KeypointPairSet::from_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path + ": empty keypoint pair file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kPairHeader) throw SchemaError(path + ": expected header " + kPairHeader);
  KeypointPairSet set;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 5) throw SchemaError(path + ": expected 5 fields, got row '" + line + "'");
    KeypointPair p;
    p.image_id = fields[0];
    p.gt = Vec2(parse_pixel(fields[1], path), parse_pixel(fields[2], path));
    p.pred = Vec2(parse_pixel(fields[3], path), parse_pixel(fields[4], path));
    set.pairs.push_back(std::move(p));
  }
  return set;
}

void KeypointPairSet::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open " + path + " for writing");
  std::fprintf(f, "%s\n", kPairHeader);
  for (const KeypointPair& p : pairs)
    std::fprintf(f, "%s,%.17g,%.17g,%.17g,%.17g\n", p.image_id.c_str(), p.gt.x(), p.gt.y(),
                 p.pred.x(), p.pred.y());
  if (std::fclose(f) != 0) throw IoError("failed writing " + path);
}

double akd(const KeypointPairSet& pairs) {
  if (pairs.pairs.empty()) throw EmptySet("no keypoint pairs");
  double sum = 0.0;
  for (const KeypointPair& p : pairs.pairs) sum += (p.gt - p.pred).norm();
  return sum / double(pairs.pairs.size());
}

double ap_at(const KeypointPairSet& pairs, double threshold) {
  if (pairs.pairs.empty()) throw EmptySet("no keypoint pairs");
  if (!(threshold > 0.0)) throw DegenerateConfiguration("ap threshold must be positive");
  std::size_t hits = 0;
  for (const KeypointPair& p : pairs.pairs)
    if ((p.gt - p.pred).norm() <= threshold) ++hits;
  return double(hits) / double(pairs.pairs.size());
}

Json MetricsReport::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["akd_px"] = akd_px;
  j["ap15"] = ap15;
  j["ap30"] = ap30;
  j["ap45"] = ap45;
  return j;
}

MetricsReport MetricsReport::from_json(const Json& j) {
  if (require_field(j, "schema_version", "metrics report").get<int>() != kSchemaVersion)
    throw SchemaError("metrics report: unsupported schema_version");
  MetricsReport r;
  r.akd_px = require_field(j, "akd_px", "metrics report").get<double>();
  r.ap15 = require_field(j, "ap15", "metrics report").get<double>();
  r.ap30 = require_field(j, "ap30", "metrics report").get<double>();
  r.ap45 = require_field(j, "ap45", "metrics report").get<double>();
  return r;
}

std::string MetricsReport::csv_row() const {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.2f,%.2f,%.2f,%.2f", akd_px, ap15 * 100.0, ap30 * 100.0,
                ap45 * 100.0);
  return buf;
}

void MetricsReport::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open " + path + " for writing");
  std::fprintf(f, "akd_px,ap15_pct,ap30_pct,ap45_pct\n%s\n", csv_row().c_str());
  if (std::fclose(f) != 0) throw IoError("failed writing " + path);
}

MetricsReport evaluate_report(const KeypointPairSet& pairs) {
  MetricsReport r;
  r.akd_px = akd(pairs);
  r.ap15 = ap_at(pairs, 15.0);
  r.ap30 = ap_at(pairs, 30.0);
  r.ap45 = ap_at(pairs, 45.0);
  return r;
}

}  // namespace toolmimic
