#include "postfeas/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "postfeas/errors.hpp"

namespace postfeas {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quote on CSV line " + std::to_string(line_no));
  out.push_back(trim(field));
  return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError("CSV is missing column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line, line_no);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError("CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw ParseError("CSV has no header");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

std::string format_real(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) {
    if (s.front() == '-') s.erase(0, 1);
  }
  return s;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double parse_real(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw ParseError("trailing characters in number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("not a number: '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw ParseError("trailing characters in integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("not an integer: '" + s + "'");
  }
}

DetectionData load_detections(const CsvTable& detections, const CsvTable& clusters) {
  DetectionData out;
  std::unordered_map<std::string, std::size_t> cluster_index;
  const std::size_t c_name = clusters.column("cluster");
  const std::size_t c_size = clusters.column("n_cells");
  for (const auto& row : clusters.rows) {
    if (cluster_index.count(row[c_name])) throw ParseError("duplicate cluster '" + row[c_name] + "'");
    const std::int64_t size = parse_int(row[c_size]);
    if (size < 1) throw ParseError("cluster '" + row[c_name] + "' has n_cells < 1");
    cluster_index.emplace(row[c_name], out.clusters.size());
    out.clusters.push_back(row[c_name]);
    out.cluster_sizes.push_back(size);
  }
  if (out.clusters.empty()) throw EmptyInput("clusters.csv has no rows");

  const std::size_t d_cluster = detections.column("cluster");
  const std::size_t d_gene = detections.column("gene");
  const std::size_t d_count = detections.column("detected_count");
  std::unordered_map<std::string, std::size_t> gene_index;
  for (const auto& row : detections.rows) {
    if (!gene_index.count(row[d_gene])) {
      gene_index.emplace(row[d_gene], out.genes.size());
      out.genes.push_back(row[d_gene]);
    }
  }
  if (out.genes.empty()) throw EmptyInput("detections.csv has no rows");

  out.detections = CountMatrix::Zero(static_cast<Eigen::Index>(out.clusters.size()),
                                     static_cast<Eigen::Index>(out.genes.size()));
  for (const auto& row : detections.rows) {
    const auto it = cluster_index.find(row[d_cluster]);
    if (it == cluster_index.end()) throw ParseError("unknown cluster '" + row[d_cluster] + "' in detections");
    const auto j = static_cast<Eigen::Index>(it->second);
    const auto g = static_cast<Eigen::Index>(gene_index.at(row[d_gene]));
    out.detections(j, g) = parse_int(row[d_count]);
  }
  return out;
}

std::vector<double> load_weights(const CsvTable& weights, const std::vector<std::string>& genes) {
  std::unordered_map<std::string, double> by_gene;
  const std::size_t c_gene = weights.column("gene");
  const std::size_t c_weight = weights.column("weight");
  for (const auto& row : weights.rows) {
    const double w = parse_real(row[c_weight]);
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("gene '" + row[c_gene] + "' has invalid weight");
    by_gene[row[c_gene]] = w;
  }
  std::vector<double> out;
  out.reserve(genes.size());
  for (const auto& g : genes) {
    const auto it = by_gene.find(g);
    out.push_back(it == by_gene.end() ? 0.0 : it->second);
  }
  return out;
}

}  // namespace postfeas
