#include "biplink/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace biplink {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  return in;
}

bool next_line(std::ifstream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) return true;
  }
  return false;
}

double parse_double(const std::string& field, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw ParseError("");
    return v;
  } catch (...) {
    throw ParseError(where + ": not a number: '" + field + "'");
  }
}

void expect_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                   const std::string& path) {
  if (got.size() < want.size()) {
    throw ParseError(path + ": malformed header");
  }
  for (std::size_t k = 0; k < want.size(); ++k) {
    if (trim(got[k]) != want[k]) {
      throw ParseError(path + ": expected header column '" + want[k] + "', got '" + got[k] + "'");
    }
  }
}

}  // namespace

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

StudyKind parse_study_kind(const std::string& text) {
  if (text == "zoocentric") return StudyKind::zoocentric;
  if (text == "phytocentric") return StudyKind::phytocentric;
  if (text == "network") return StudyKind::network;
  if (text == "pair") return StudyKind::pair;
  throw ParseError("unknown study kind: '" + text + "'");
}

IngestResult ingest_records(const std::string& records_path, const std::string& studies_path) {
  // Study metadata first, keyed by label.
  std::unordered_map<std::string, StudyMeta> meta;
  {
    std::ifstream in = open_or_throw(studies_path);
    std::string line;
    if (!next_line(in, line)) throw ParseError(studies_path + ": empty input");
    expect_header(split_fields(line), {"study_id", "kind", "site", "country", "zone"},
                  studies_path);
    std::size_t lineno = 1;
    while (next_line(in, line)) {
      ++lineno;
      const auto f = split_fields(line);
      if (f.size() != 5) {
        throw ParseError(studies_path + ":" + std::to_string(lineno) + ": expected 5 fields");
      }
      StudyMeta m;
      m.id = f[0];
      m.kind = parse_study_kind(f[1]);
      m.site = f[2];
      m.country = f[3];
      m.zone = f[4];
      if (m.id.empty()) {
        throw ParseError(studies_path + ":" + std::to_string(lineno) + ": empty study_id");
      }
      if (m.country.empty() || m.zone.empty()) {
        throw ParseError(studies_path + ":" + std::to_string(lineno) +
                         ": country and zone are required for study '" + m.id + "'");
      }
      if (!meta.emplace(m.id, m).second) {
        throw ParseError(studies_path + ":" + std::to_string(lineno) + ": duplicate study '" +
                         m.id + "'");
      }
    }
  }

  IngestResult out;
  std::unordered_map<std::string, int> study_id;
  std::vector<Triple> entries;
  {
    std::ifstream in = open_or_throw(records_path);
    std::string line;
    if (!next_line(in, line)) throw ParseError(records_path + ": empty input");
    expect_header(split_fields(line), {"study_id", "animal_id", "plant_id"}, records_path);
    std::size_t lineno = 1;
    while (next_line(in, line)) {
      ++lineno;
      const auto f = split_fields(line);
      if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty()) {
        throw ParseError(records_path + ":" + std::to_string(lineno) +
                         ": expected study_id,animal_id,plant_id");
      }
      ++out.rows_read;
      auto [it, inserted] = study_id.try_emplace(f[0], static_cast<int>(out.studies.size()));
      if (inserted) {
        const auto mit = meta.find(f[0]);
        if (mit == meta.end()) {
          throw ParseError(records_path + ":" + std::to_string(lineno) +
                           ": study '" + f[0] + "' has no metadata entry");
        }
        out.studies.push_back(mit->second);
      }
      entries.push_back({out.species.intern_animal(f[1]), out.species.intern_plant(f[2]),
                         static_cast<std::int32_t>(it->second)});
    }
  }
  if (entries.empty()) throw ParseError(records_path + ": empty input");

  out.A = ObservedTensor(out.species.n_animals(), out.species.n_plants(),
                         static_cast<int>(out.studies.size()), std::move(entries));
  out.unique_triples = out.A.entries().size();
  out.unique_pairs = out.A.observed_pairs().size();
  return out;
}

void standardize_column(Eigen::Ref<Eigen::VectorXd> col, const std::string& what) {
  const double m = col.mean();
  const double var = (col.array() - m).square().mean();
  if (!(var > 0.0)) throw ParseError(what + ": constant column cannot be standardized");
  col = (col.array() - m) / std::sqrt(var);
}

TraitColumns read_traits(const std::string& path, const std::vector<std::string>& labels,
                         const std::vector<TraitKind>& kinds, const std::string& side) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!next_line(in, line)) throw ParseError(path + ": empty input");
  const auto header = split_fields(line);
  if (header.empty() || header[0] != "species_id") {
    throw ParseError(path + ": first header column must be species_id");
  }
  TraitColumns out;
  out.names.assign(header.begin() + 1, header.end());
  const int p = static_cast<int>(out.names.size());
  if (p == 0) throw ParseError(path + ": no trait columns");
  if (kinds.size() != out.names.size()) {
    throw ConfigError(path + ": " + std::to_string(out.names.size()) + " trait columns but " +
                      std::to_string(kinds.size()) + " declared kinds for " + side + " traits");
  }
  out.kinds = kinds;

  std::unordered_map<std::string, int> row_of;
  for (std::size_t k = 0; k < labels.size(); ++k) row_of[labels[k]] = static_cast<int>(k);

  const int n = static_cast<int>(labels.size());
  out.M.setConstant(n, p, std::numeric_limits<double>::quiet_NaN());
  std::size_t lineno = 1;
  while (next_line(in, line)) {
    ++lineno;
    const auto f = split_fields(line);
    if (static_cast<int>(f.size()) != p + 1) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(p + 1) + " fields");
    }
    const auto it = row_of.find(f[0]);
    if (it == row_of.end()) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": unknown " + side +
                       " species '" + f[0] + "'");
    }
    for (int c = 0; c < p; ++c) {
      out.M(it->second, c) = parse_double(f[c + 1], path + ":" + std::to_string(lineno));
    }
  }
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < p; ++c) {
      if (std::isnan(out.M(r, c))) {
        throw ParseError(path + ": missing trait row for " + side + " species '" + labels[r] +
                         "'");
      }
    }
  }
  for (int c = 0; c < p; ++c) {
    if (out.kinds[c] == TraitKind::continuous) {
      standardize_column(out.M.col(c), path + ": trait '" + out.names[c] + "'");
    } else {
      for (int r = 0; r < n; ++r) {
        if (out.M(r, c) != 0.0 && out.M(r, c) != 1.0) {
          throw ParseError(path + ": trait '" + out.names[c] + "' declared binary but row " +
                           labels[r] + " has value " + std::to_string(out.M(r, c)));
        }
      }
    }
  }
  return out;
}

LabeledMatrix read_labeled_matrix(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!next_line(in, line)) throw ParseError(path + ": empty input");
  const auto header = split_fields(line);
  if (header.size() < 2) throw ParseError(path + ": malformed header");
  LabeledMatrix out;
  out.col_labels.assign(header.begin() + 1, header.end());
  const int nc = static_cast<int>(out.col_labels.size());
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (next_line(in, line)) {
    ++lineno;
    const auto f = split_fields(line);
    if (static_cast<int>(f.size()) != nc + 1) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(nc + 1) + " fields");
    }
    out.row_labels.push_back(f[0]);
    auto& r = rows.emplace_back();
    r.reserve(nc);
    for (int c = 0; c < nc; ++c) {
      r.push_back(parse_double(f[c + 1], path + ":" + std::to_string(lineno)));
    }
  }
  out.M.resize(static_cast<int>(rows.size()), nc);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < nc; ++c) out.M(static_cast<int>(r), c) = rows[r][c];
  }
  return out;
}

Eigen::MatrixXd read_phylo(const std::string& path, const std::vector<std::string>& labels,
                           const std::string& side) {
  const LabeledMatrix lm = read_labeled_matrix(path);
  const int n = static_cast<int>(labels.size());
  if (lm.M.rows() != lm.M.cols() || static_cast<int>(lm.row_labels.size()) != lm.M.rows()) {
    throw ParseError(path + ": matrix is not square");
  }
  std::unordered_map<std::string, int> pos;
  for (std::size_t k = 0; k < lm.row_labels.size(); ++k) {
    if (lm.row_labels[k] != lm.col_labels[k]) {
      throw ParseError(path + ": row/column label mismatch at position " + std::to_string(k));
    }
    pos[lm.row_labels[k]] = static_cast<int>(k);
  }
  if (static_cast<int>(pos.size()) != n || lm.M.rows() != n) {
    throw ParseError(path + ": expected exactly the " + std::to_string(n) + " " + side +
                     " species labels");
  }
  Eigen::MatrixXd C(n, n);
  for (int r = 0; r < n; ++r) {
    const auto rit = pos.find(labels[r]);
    if (rit == pos.end()) throw ParseError(path + ": missing species '" + labels[r] + "'");
    for (int c = 0; c < n; ++c) {
      C(r, c) = lm.M(rit->second, pos.at(labels[c]));
    }
  }
  return C;
}

void write_labeled_matrix(const std::string& path, const Eigen::MatrixXd& M,
                          const std::vector<std::string>& row_labels,
                          const std::vector<std::string>& col_labels,
                          const std::string& corner) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << corner;
  for (const auto& c : col_labels) out << ',' << c;
  out << '\n';
  out << std::setprecision(12);
  for (int r = 0; r < M.rows(); ++r) {
    out << row_labels[r];
    for (int c = 0; c < M.cols(); ++c) out << ',' << M(r, c);
    out << '\n';
  }
}

void write_interactions_csv(const std::string& path, const SpeciesIndex& species,
                            const ObservedTensor& A,
                            const std::vector<StudyMeta>& studies) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << "study_id,animal_id,plant_id\n";
  // Study-major order so first-appearance indexing survives a round trip.
  std::vector<Triple> entries = A.entries();
  std::sort(entries.begin(), entries.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.study, a.animal, a.plant) < std::tie(b.study, b.animal, b.plant);
  });
  for (const Triple& t : entries) {
    out << studies[t.study].id << ',' << species.animal_labels[t.animal] << ','
        << species.plant_labels[t.plant] << '\n';
  }
}

void write_studies_csv(const std::string& path, const std::vector<StudyMeta>& studies) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << "study_id,kind,site,country,zone\n";
  for (const StudyMeta& m : studies) {
    out << m.id << ',' << study_kind_name(m.kind) << ',' << m.site << ',' << m.country << ','
        << m.zone << '\n';
  }
}

void write_traits_csv(const std::string& path, const Eigen::MatrixXd& M,
                      const std::vector<std::string>& species_labels,
                      const std::vector<std::string>& trait_names) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << "species_id";
  for (const auto& t : trait_names) out << ',' << t;
  out << '\n';
  out << std::setprecision(12);
  for (int r = 0; r < M.rows(); ++r) {
    out << species_labels[r];
    for (int c = 0; c < M.cols(); ++c) out << ',' << M(r, c);
    out << '\n';
  }
}

}  // namespace biplink
