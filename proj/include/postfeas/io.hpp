#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "postfeas/posterior.hpp"

namespace postfeas {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index of `name`; throws ParseError when absent.
  std::size_t column(const std::string& name) const;
};

/// Comma-separated, first line is the header. Double-quoted fields may hold commas.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Fixed-point with `digits` decimals; "nan"/"inf" spelled out.
std::string format_real(double v, int digits = 6);
std::string csv_escape(const std::string& field);

double parse_real(const std::string& s);
std::int64_t parse_int(const std::string& s);

/// Single-cell detection data: genes in first-seen order of the detections file,
/// clusters in the order of clusters.csv. Missing (cluster, gene) pairs count 0.
struct DetectionData {
  std::vector<std::string> clusters;
  std::vector<std::int64_t> cluster_sizes;
  std::vector<std::string> genes;
  CountMatrix detections;  // clusters x genes
};

/// detections.csv: cluster,gene,detected_count; clusters.csv: cluster,n_cells.
DetectionData load_detections(const CsvTable& detections, const CsvTable& clusters);

/// weights.csv: gene,weight, reordered to `genes`. Genes without a row get weight 0.
std::vector<double> load_weights(const CsvTable& weights, const std::vector<std::string>& genes);

}  // namespace postfeas
