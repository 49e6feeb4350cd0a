// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcsv/characterization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "qcsv/canonical_json.hpp"
#include "qcsv/error.hpp"
#include "qcsv/repository.hpp"

namespace qcsv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kSuffix = ".data.json";
constexpr std::string_view kUploadTag = "char";

double stat_number(const json& body, const char* key, const std::string& where) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_number()) {
    throw Error(ErrorCode::MalformedDocument, where + ": \"" + key + "\" must be a number");
  }
  const double d = it->get<double>();
  if (!std::isfinite(d)) throw Error(ErrorCode::MalformedDocument, where + ": \"" + key + "\" is not finite");
  return d;
}

Timestamp stat_time(const json& body, const char* key, const std::string& where) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw Error(ErrorCode::MalformedDocument, where + ": \"" + key + "\" must be a string");
  }
  return parse_compact(it->get<std::string>());
}

void sort_points(std::vector<SeriesPoint>& points) {
  std::stable_sort(points.begin(), points.end(), [](const SeriesPoint& a, const SeriesPoint& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.upload_index < b.upload_index;
  });
}

}  // namespace

std::string chip_from_filename(std::string_view filename) {
  std::string base = fs::path(std::string(filename)).filename().string();
  if (base.size() <= kSuffix.size() || base.compare(base.size() - kSuffix.size(), kSuffix.size(), kSuffix) != 0) {
    throw Error(ErrorCode::BadFilename, "expected <chip>.data.json, got \"" + std::string(filename) + "\"");
  }
  base.resize(base.size() - kSuffix.size());
  if (!is_valid_name(base)) throw Error(ErrorCode::BadFilename, "invalid chip name \"" + base + "\"");
  return base;
}

std::map<std::string, std::vector<PropertyStats>> parse_characterization(const json& doc) {
  if (!doc.is_object() || doc.empty()) {
    throw Error(ErrorCode::MalformedDocument, "characterization document must be a non-empty object of qubits");
  }
  std::map<std::string, std::vector<PropertyStats>> out;
  for (const auto& [qubit, props] : doc.items()) {
    if (qubit.empty()) throw Error(ErrorCode::MalformedDocument, "empty qubit id");
    if (!props.is_object()) throw Error(ErrorCode::MalformedDocument, qubit + ": expected an object of properties");
    auto& records = out[qubit];
    for (const auto& [property, body] : props.items()) {
      const std::string where = qubit + "." + property;
      if (property.empty()) throw Error(ErrorCode::MalformedDocument, qubit + ": empty property name");
      if (!body.is_object()) throw Error(ErrorCode::MalformedDocument, where + ": expected an object");
      PropertyStats s;
      s.property = property;
      s.mean = stat_number(body, "mean", where);
      s.std = stat_number(body, "std", where);
      s.start = stat_time(body, "startdatetime", where);
      s.end = stat_time(body, "enddatetime", where);
      if (s.end < s.start) throw Error(ErrorCode::BadDatetime, where + ": enddatetime precedes startdatetime");
      records.push_back(std::move(s));
    }
  }
  return out;
}

json to_json(const ExperimentSeries& series) {
  json points = json::array();
  for (const auto& p : series.points) {
    points.push_back({{"startdatetime", format_iso(p.start)},
                      {"enddatetime", format_iso(p.end)},
                      {"mean", p.mean},
                      {"std", p.std},
                      {"upload", p.upload.str()}});
  }
  json key = {{"chip", series.chip}, {"property", series.property}};
  if (!series.qubit.empty()) key["qubit"] = series.qubit;
  return {{"key", std::move(key)}, {"points", std::move(points)}};
}

json to_json(const ChipSummary& s) { return {{"chip", s.chip}, {"uploads", s.uploads}, {"qubits", s.qubits}}; }

CharacterizationStore::CharacterizationStore(Repository& repository)
    : repository_(repository), dir_(repository.store().characterization_dir()) {
  load();
}

void CharacterizationStore::load() {
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir_, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.empty() || name[0] == '.' || entry.path().extension() != ".jsonl") continue;
    const std::string chip = entry.path().stem().string();
    auto index = std::make_shared<ChipIndex>();
    const std::string data = read_file(entry.path());
    std::size_t pos = 0;
    std::size_t good_end = 0;
    while (pos < data.size()) {
      const auto nl = data.find('\n', pos);
      const bool last_line = nl == std::string::npos || nl + 1 >= data.size();
      try {
        if (nl == std::string::npos) throw std::runtime_error("unterminated line");
        const json line = json::parse(data.substr(pos, nl - pos));
        Upload up;
        up.id = ObjectId::parse(line.at("content_hash").get<std::string>());
        up.ingested_at = parse_iso(line.at("ingested_at").get<std::string>());
        up.records = parse_characterization(line.at("data"));
        index->hashes.insert(up.id);
        index->uploads.push_back(std::move(up));
        good_end = nl + 1;
        pos = nl + 1;
      } catch (const std::exception& e) {
        if (!last_line) throw Error(ErrorCode::CorruptLayout, "corrupt line in " + name + ": " + e.what());
        break;
      }
    }
    if (good_end != data.size()) fs::resize_file(entry.path(), good_end);
    chips_[chip] = std::move(index);
  }
}

std::mutex& CharacterizationStore::ingest_lock(const std::string& chip) {
  std::lock_guard lock(locks_mutex_);
  auto& slot = ingest_locks_[chip];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::shared_ptr<const CharacterizationStore::ChipIndex> CharacterizationStore::chip_index(
    const std::string& chip) const {
  std::lock_guard lock(index_mutex_);
  const auto it = chips_.find(chip);
  if (it == chips_.end()) throw Error(ErrorCode::UnknownChip, "no characterization data for chip " + chip);
  return it->second;
}

IngestResult CharacterizationStore::ingest_upload(std::string_view filename, std::string_view document,
                                                  const Actor& actor) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("invalid JSON: ") + e.what());
  }
  return ingest_upload(filename, doc, actor);
}

IngestResult CharacterizationStore::ingest_upload(std::string_view filename, const json& document,
                                                  const Actor& actor) {
  const std::string chip = chip_from_filename(filename);
  Upload up;
  up.records = parse_characterization(document);
  up.id = ObjectId::of(kUploadTag, canonical_dump(document));
  up.ingested_at = now_utc();

  std::lock_guard ingest(ingest_lock(chip));
  std::shared_ptr<const ChipIndex> current;
  {
    std::lock_guard lock(index_mutex_);
    if (const auto it = chips_.find(chip); it != chips_.end()) current = it->second;
  }
  if (current && current->hashes.count(up.id)) return {chip, up.id, true};

  const json line = {{"content_hash", up.id.str()},
                     {"ingested_at", format_iso(up.ingested_at)},
                     {"chip", chip},
                     {"data", document}};
  const std::string text = line.dump() + "\n";
  {
    std::ofstream out(dir_ / (chip + ".jsonl"), std::ios::binary | std::ios::app);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "cannot append characterization data for " + chip);
  }

  auto next = current ? std::make_shared<ChipIndex>(*current) : std::make_shared<ChipIndex>();
  next->hashes.insert(up.id);
  const ObjectId id = up.id;
  std::size_t qubits = up.records.size();
  next->uploads.push_back(std::move(up));
  {
    std::lock_guard lock(index_mutex_);
    chips_[chip] = std::move(next);
  }
  repository_.record_event(actor, "ingest_characterization",
                           {{"chip", chip}, {"upload", id.str()}, {"filename", std::string(filename)}, {"qubits", qubits}});
  return {chip, id, false};
}

std::map<std::string, ExperimentSeries> CharacterizationStore::series_by_qubit(const std::string& chip,
                                                                               const std::string& qubit) const {
  const auto index = chip_index(chip);
  std::map<std::string, ExperimentSeries> out;
  bool seen = false;
  for (std::size_t i = 0; i < index->uploads.size(); ++i) {
    const Upload& up = index->uploads[i];
    const auto it = up.records.find(qubit);
    if (it == up.records.end()) continue;
    seen = true;
    for (const auto& s : it->second) {
      auto& series = out[s.property];
      series.chip = chip;
      series.qubit = qubit;
      series.property = s.property;
      series.points.push_back({s.start, s.end, s.mean, s.std, up.id, i});
    }
  }
  if (!seen) throw Error(ErrorCode::UnknownQubit, "qubit " + qubit + " never reported on chip " + chip);
  for (auto& [_, series] : out) sort_points(series.points);
  return out;
}

std::map<std::string, ExperimentSeries> CharacterizationStore::series_by_property(const std::string& chip,
                                                                                  const std::string& property) const {
  const auto index = chip_index(chip);
  std::map<std::string, ExperimentSeries> out;
  for (std::size_t i = 0; i < index->uploads.size(); ++i) {
    const Upload& up = index->uploads[i];
    for (const auto& [qubit, records] : up.records) {
      for (const auto& s : records) {
        if (s.property != property) continue;
        auto& series = out[qubit];
        series.chip = chip;
        series.qubit = qubit;
        series.property = property;
        series.points.push_back({s.start, s.end, s.mean, s.std, up.id, i});
      }
    }
  }
  if (out.empty()) throw Error(ErrorCode::UnknownProperty, "property " + property + " never reported on chip " + chip);
  for (auto& [_, series] : out) sort_points(series.points);
  return out;
}

std::vector<ChipSummary> CharacterizationStore::list_chips() const {
  std::map<std::string, std::shared_ptr<const ChipIndex>> chips;
  {
    std::lock_guard lock(index_mutex_);
    chips = chips_;
  }
  std::vector<ChipSummary> out;
  for (const auto& [chip, index] : chips) {
    std::set<std::string> qubits;
    for (const auto& up : index->uploads) {
      for (const auto& [q, _] : up.records) qubits.insert(q);
    }
    out.push_back({chip, index->uploads.size(), {qubits.begin(), qubits.end()}});
  }
  return out;
}

}  // namespace qcsv
