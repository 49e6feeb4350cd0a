// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcsv/object_id.hpp"
#include "qcsv/object_store.hpp"
#include "qcsv/timestamp.hpp"

namespace qcsv {

class Repository;

/// The seven first-class properties. Other names are accepted and stored.
inline constexpr std::string_view kKnownProperties[] = {"prep0read1", "prep1read0", "rb1qinfidelity", "separation",
                                                        "t1",         "t2ramsey",   "t2spinecho"};

struct PropertyStats {
  std::string property;
  double mean = 0;
  double std = 0;
  Timestamp start{};
  Timestamp end{};
};

struct SeriesPoint {
  Timestamp start{};
  Timestamp end{};
  double mean = 0;
  double std = 0;
  ObjectId upload;
  std::size_t upload_index = 0;  // ingestion order within the chip
};

struct ExperimentSeries {
  std::string chip;
  std::string qubit;     // empty for per-property aggregates
  std::string property;
  std::vector<SeriesPoint> points;  // ascending by start, then ingestion order
};

struct ChipSummary {
  std::string chip;
  std::size_t uploads = 0;
  std::vector<std::string> qubits;
};

struct IngestResult {
  std::string chip;
  ObjectId upload;
  bool duplicate = false;
};

/// "<chip>.data.json" -> "<chip>". Directory components are ignored.
/// Throws Error(BadFilename).
std::string chip_from_filename(std::string_view filename);

/// Validates an upload and returns its records per qubit.
/// Throws MalformedDocument or BadDatetime.
std::map<std::string, std::vector<PropertyStats>> parse_characterization(const nlohmann::json& document);

nlohmann::json to_json(const ExperimentSeries& series);
nlohmann::json to_json(const ChipSummary& summary);

/// Append-only per-chip experiment store. Each accepted upload is one JSON
/// line in characterization/<chip>.jsonl; the in-memory index is rebuilt on
/// open and swapped whole after every ingest so readers see a consistent view.
class CharacterizationStore {
 public:
  /// `repository` receives audit events and owns the data directory.
  explicit CharacterizationStore(Repository& repository);

  IngestResult ingest_upload(std::string_view filename, std::string_view document, const Actor& actor);
  IngestResult ingest_upload(std::string_view filename, const nlohmann::json& document, const Actor& actor);

  std::map<std::string, ExperimentSeries> series_by_qubit(const std::string& chip, const std::string& qubit) const;
  std::map<std::string, ExperimentSeries> series_by_property(const std::string& chip,
                                                             const std::string& property) const;
  std::vector<ChipSummary> list_chips() const;

 private:
  struct Upload {
    ObjectId id;
    Timestamp ingested_at{};
    std::map<std::string, std::vector<PropertyStats>> records;
  };
  struct ChipIndex {
    std::vector<Upload> uploads;
    std::set<ObjectId> hashes;
  };

  void load();
  std::shared_ptr<const ChipIndex> chip_index(const std::string& chip) const;
  std::mutex& ingest_lock(const std::string& chip);

  Repository& repository_;
  std::filesystem::path dir_;

  mutable std::mutex index_mutex_;
  std::map<std::string, std::shared_ptr<const ChipIndex>> chips_;

  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> ingest_locks_;
};

}  // namespace qcsv
