#include "nonword/study.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "nonword/errors.hpp"

namespace nonword {

char proficiency_code(Proficiency p) {
  switch (p) {
    case Proficiency::Beginner:
      return 'B';
    case Proficiency::Intermediate:
      return 'I';
    case Proficiency::Advanced:
      return 'A';
  }
  return '?';
}

std::optional<Proficiency> parse_proficiency(std::string_view code) {
  if (code == "B") return Proficiency::Beginner;
  if (code == "I") return Proficiency::Intermediate;
  if (code == "A") return Proficiency::Advanced;
  return std::nullopt;
}

std::string_view group_name(StimulusGroup g) {
  static constexpr std::string_view names[] = {"DE", "EN", "SV", "FI"};
  return names[static_cast<std::size_t>(g)];
}

std::optional<StimulusGroup> parse_group(std::string_view name) {
  for (auto g : kStimulusGroups) {
    if (group_name(g) == name) return g;
  }
  return std::nullopt;
}

std::string_view response_name(Response r) { return r == Response::Accept ? "ACCEPT" : "REJECT"; }

std::optional<Response> parse_response(std::string_view name) {
  if (name == "ACCEPT") return Response::Accept;
  if (name == "REJECT") return Response::Reject;
  return std::nullopt;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

TrialRecord make_record(std::string rater, std::string l1, std::string_view proficiency, std::string word,
                        std::string_view group, std::string_view response, double rt, const std::string& where) {
  TrialRecord r;
  if (rater.empty()) throw InputFormatError(where + ": empty rater_id");
  const auto p = parse_proficiency(proficiency);
  if (!p) throw InputFormatError(where + ": proficiency must be B, I or A");
  const auto g = parse_group(group);
  if (!g) throw InputFormatError(where + ": group must be DE, EN, SV or FI");
  const auto resp = parse_response(response);
  if (!resp) throw InputFormatError(where + ": response must be ACCEPT or REJECT");
  if (!std::isfinite(rt) || rt <= 0.0) throw InputFormatError(where + ": rt_seconds must be positive");
  if (word.empty()) throw InputFormatError(where + ": empty word");
  r.rater_id = std::move(rater);
  r.l1 = std::move(l1);
  r.proficiency = *p;
  r.word = std::move(word);
  r.group = *g;
  r.response = *resp;
  r.rt_seconds = rt;
  return r;
}

std::string format_number(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputFormatError("trial log is empty; expected a header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != kTrialCsvHeader) {
    throw InputFormatError("trial log header must be '" + std::string(kTrialCsvHeader) + "'");
  }
  std::vector<TrialRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    auto fields = split_csv(line);
    if (fields.size() != 7) throw InputFormatError(where + ": expected 7 fields, got " + std::to_string(fields.size()));
    double rt = 0.0;
    try {
      std::size_t used = 0;
      rt = std::stod(fields[6], &used);
      if (used != fields[6].size()) throw std::invalid_argument("rt");
    } catch (const std::exception&) {
      throw InputFormatError(where + ": rt_seconds is not a number");
    }
    records.push_back(make_record(fields[0], fields[1], fields[2], fields[3], fields[4], fields[5], rt, where));
  }
  return records;
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records) {
  out << kTrialCsvHeader << '\n';
  for (const auto& r : records) {
    out << csv_field(r.rater_id) << ',' << csv_field(r.l1) << ',' << proficiency_code(r.proficiency) << ','
        << csv_field(r.word) << ',' << group_name(r.group) << ',' << response_name(r.response) << ','
        << format_number(r.rt_seconds) << '\n';
  }
}

nlohmann::json to_json(const TrialRecord& r) {
  return {{"rater_id", r.rater_id},
          {"l1", r.l1},
          {"proficiency", std::string(1, proficiency_code(r.proficiency))},
          {"word", r.word},
          {"group", group_name(r.group)},
          {"response", response_name(r.response)},
          {"rt_seconds", r.rt_seconds}};
}

TrialRecord trial_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw InputFormatError("trial record must be an object");
    if (!j.at("rt_seconds").is_number()) throw InputFormatError("rt_seconds must be a number");
    return make_record(j.at("rater_id").get<std::string>(), j.at("l1").get<std::string>(),
                       j.at("proficiency").get<std::string>(), j.at("word").get<std::string>(),
                       j.at("group").get<std::string>(), j.at("response").get<std::string>(),
                       j.at("rt_seconds").get<double>(), "trial record");
  } catch (const nlohmann::json::exception& e) {
    throw InputFormatError(std::string("trial record: ") + e.what());
  }
}

std::vector<Rater> raters_of(std::span<const TrialRecord> records) {
  std::vector<Rater> out;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (seen.insert(r.rater_id).second) out.push_back({r.rater_id, r.l1, r.proficiency});
  }
  return out;
}

AccuracyTable accuracy(std::span<const TrialRecord> records) {
  AccuracyTable table;
  table.raters = raters_of(records);
  std::map<std::string, std::array<std::pair<std::size_t, std::size_t>, 4>> tally;  // correct, total
  for (const auto& r : records) {
    auto& cell = tally[r.rater_id][static_cast<std::size_t>(r.group)];
    cell.second += 1;
    if (r.correct()) cell.first += 1;
  }
  for (const auto& [rater, cells] : tally) {
    auto& row = table.percent[rater];
    for (std::size_t g = 0; g < 4; ++g) {
      if (cells[g].second > 0) {
        row[g] = 100.0 * static_cast<double>(cells[g].first) / static_cast<double>(cells[g].second);
      }
    }
  }
  return table;
}

RaterGroupStats group_reaction_times(std::span<const TrialRecord> records) {
  RaterGroupStats stats;
  stats.raters = raters_of(records);
  struct Sums {
    double reject = 0.0, accept = 0.0;
  };
  std::map<std::string, std::array<Sums, 4>> sums;
  for (const auto& r : records) {
    const auto g = static_cast<std::size_t>(r.group);
    auto& cell = stats.cells[r.rater_id][g];
    auto& sum = sums[r.rater_id][g];
    if (r.response == Response::Reject) {
      ++cell.reject_count;
      sum.reject += r.rt_seconds;
    } else {
      ++cell.accept_count;
      sum.accept += r.rt_seconds;
    }
  }
  for (auto& [rater, cells] : stats.cells) {
    for (std::size_t g = 0; g < 4; ++g) {
      auto& cell = cells[g];
      const auto& sum = sums[rater][g];
      if (cell.reject_count) cell.reject_mean = sum.reject / static_cast<double>(cell.reject_count);
      if (cell.accept_count) cell.accept_mean = sum.accept / static_cast<double>(cell.accept_count);
      if (cell.count()) cell.combined_mean = (sum.reject + sum.accept) / static_cast<double>(cell.count());
    }
  }
  return stats;
}

std::map<std::string, double> normalized_average(const RaterMeans& means) {
  if (means.empty()) throw AnalysisError("no raters to normalize");
  std::set<std::string> columns;
  for (const auto& [_, row] : means) {
    for (const auto& [column, _v] : row) columns.insert(column);
  }
  std::map<std::string, double> out;
  for (const auto& column : columns) out[column] = 0.0;
  for (const auto& [rater, row] : means) {
    double sum = 0.0;
    for (const auto& column : columns) {
      auto it = row.find(column);
      if (it == row.end()) throw AnalysisError("rater '" + rater + "' has no mean for group '" + column + "'");
      if (!(it->second > 0.0)) {
        throw AnalysisError("rater '" + rater + "' has a non-positive mean for group '" + column + "'");
      }
      sum += it->second;
    }
    const double mean_of_means = sum / static_cast<double>(columns.size());
    for (const auto& column : columns) out[column] += row.at(column) / mean_of_means;
  }
  for (auto& [_, v] : out) v /= static_cast<double>(means.size());
  return out;
}

std::vector<TrialRecord> filter_by_proficiency(std::span<const TrialRecord> records,
                                               const std::set<Proficiency>& allowed) {
  std::vector<TrialRecord> out;
  for (const auto& r : records) {
    if (allowed.count(r.proficiency)) out.push_back(r);
  }
  if (out.empty()) throw AnalysisError("no raters remain after the proficiency filter");
  return out;
}

std::array<std::string, 12> rt_columns() {
  static constexpr const char* letters[] = {"D", "E", "S", "F"};
  std::array<std::string, 12> out;
  for (std::size_t g = 0; g < 4; ++g) {
    out[3 * g] = std::string(letters[g]) + "0";
    out[3 * g + 1] = std::string(letters[g]) + "1";
    out[3 * g + 2] = std::string(letters[g]) + "C";
  }
  return out;
}

namespace {

// The 12 cells of one rater; nullopt where no trial contributes.
std::array<std::optional<double>, 12> rt_cells(const std::array<CellStats, 4>& cells) {
  std::array<std::optional<double>, 12> out;
  for (std::size_t g = 0; g < 4; ++g) {
    const auto& c = cells[g];
    if (c.reject_count) out[3 * g] = c.reject_mean;
    if (c.accept_count) out[3 * g + 1] = c.accept_mean;
    if (c.count()) out[3 * g + 2] = c.combined_mean;
  }
  return out;
}

}  // namespace

std::array<double, 12> normalized_rt_cells(const RaterGroupStats& stats) {
  if (stats.cells.empty()) throw AnalysisError("no raters to normalize");
  std::array<double, 12> out{};
  for (const auto& [rater, cells] : stats.cells) {
    const auto values = rt_cells(cells);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : values) {
      if (v) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) continue;
    const double mean_of_means = sum / static_cast<double>(n);
    for (std::size_t i = 0; i < 12; ++i) {
      if (values[i]) out[i] += *values[i] / mean_of_means;
    }
  }
  for (auto& v : out) v /= static_cast<double>(stats.cells.size());
  return out;
}

Analysis analyze(std::span<const TrialRecord> records) {
  if (records.empty()) throw AnalysisError("no trials to analyze");
  Analysis analysis;
  std::vector<std::string> l1s;
  for (const auto& r : records) {
    if (std::find(l1s.begin(), l1s.end(), r.l1) == l1s.end()) l1s.push_back(r.l1);
  }
  for (const auto& l1 : l1s) {
    std::vector<TrialRecord> subset;
    for (const auto& r : records) {
      if (r.l1 == l1) subset.push_back(r);
    }
    L1Analysis group;
    group.l1 = l1;
    group.raters = raters_of(subset);
    group.stats = group_reaction_times(subset);
    group.accuracy = accuracy(subset);

    RaterMeans combined;
    for (const auto& rater : group.raters) {
      auto& row = combined[rater.id];
      for (auto g : kStimulusGroups) {
        const auto& cell = group.stats.at(rater.id, g);
        if (cell.count()) row[std::string(group_name(g))] = cell.combined_mean;
      }
    }
    try {
      group.navg = normalized_average(combined);
      if (group.navg->size() != 4) {
        throw AnalysisError("normalized average needs trials in all four groups");
      }
    } catch (const AnalysisError& e) {
      group.navg.reset();
      group.navg_error = e.what();
    }

    group.na = normalized_rt_cells(group.stats);
    try {
      const auto advanced = filter_by_proficiency(subset, {Proficiency::Intermediate, Proficiency::Advanced});
      group.na_intermediate_advanced = normalized_rt_cells(group_reaction_times(advanced));
    } catch (const AnalysisError&) {
      group.na_intermediate_advanced.reset();
    }
    analysis.groups.push_back(std::move(group));
  }
  return analysis;
}

namespace {

std::string fixed(double v, int digits = 2) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

std::string rater_label(const Rater& r) { return r.id + " (" + proficiency_code(r.proficiency) + ")"; }

}  // namespace

void write_analysis_csv(std::ostream& out, const Analysis& analysis) {
  const auto columns = rt_columns();
  for (const auto& group : analysis.groups) {
    out << "# reaction_time_by_group l1=" << group.l1 << '\n';
    out << "group";
    for (const auto& r : group.raters) out << ',' << csv_field(r.id);
    out << ",nAvg\n";
    for (auto g : kStimulusGroups) {
      out << group_name(g);
      for (const auto& r : group.raters) {
        const auto& cell = group.stats.at(r.id, g);
        out << ',' << (cell.count() ? fixed(cell.combined_mean) : "");
      }
      out << ',' << (group.navg ? fixed(group.navg->at(std::string(group_name(g)))) : "") << '\n';
    }

    out << "# accuracy l1=" << group.l1 << '\n';
    out << "rater,DE,EN,SV,FI\n";
    for (const auto& r : group.raters) {
      out << csv_field(rater_label(r));
      for (const auto& v : group.accuracy.percent.at(r.id)) out << ',' << (v ? fixed(*v, 1) : "");
      out << '\n';
    }

    out << "# reaction_time_by_response l1=" << group.l1 << '\n';
    out << 'R';
    for (const auto& c : columns) out << ',' << c;
    out << '\n';
    for (const auto& r : group.raters) {
      out << csv_field(rater_label(r));
      const auto& cells = group.stats.cells.at(r.id);
      for (const auto& v : rt_cells(cells)) out << ',' << fixed(v.value_or(0.0));
      out << '\n';
    }
    out << "nA";
    for (double v : group.na) out << ',' << fixed(v);
    out << '\n';
    if (group.na_intermediate_advanced) {
      out << "nA2";
      for (double v : *group.na_intermediate_advanced) out << ',' << fixed(v);
      out << '\n';
    }
  }
}

nlohmann::json to_json(const Analysis& analysis) {
  const auto columns = rt_columns();
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& group : analysis.groups) {
    nlohmann::json raters = nlohmann::json::array();
    for (const auto& r : group.raters) {
      nlohmann::json combined = nlohmann::json::object();
      nlohmann::json acc = nlohmann::json::object();
      nlohmann::json rt = nlohmann::json::object();
      const auto& cells = group.stats.cells.at(r.id);
      const auto values = rt_cells(cells);
      for (auto g : kStimulusGroups) {
        const auto i = static_cast<std::size_t>(g);
        const std::string name(group_name(g));
        combined[name] = cells[i].count() ? nlohmann::json(cells[i].combined_mean) : nlohmann::json(nullptr);
        const auto& a = group.accuracy.percent.at(r.id)[i];
        acc[name] = a ? nlohmann::json(*a) : nlohmann::json(nullptr);
      }
      for (std::size_t i = 0; i < 12; ++i) rt[columns[i]] = values[i].value_or(0.0);
      raters.push_back({{"rater_id", r.id},
                        {"proficiency", std::string(1, proficiency_code(r.proficiency))},
                        {"combined_mean", combined},
                        {"accuracy", acc},
                        {"reaction_times", rt}});
    }
    nlohmann::json na = nlohmann::json::object();
    for (std::size_t i = 0; i < 12; ++i) na[columns[i]] = group.na[i];
    nlohmann::json entry{{"l1", group.l1}, {"raters", raters}, {"nA", na}};
    if (group.navg) {
      entry["nAvg"] = *group.navg;
    } else {
      entry["nAvg"] = nullptr;
      entry["nAvg_error"] = group.navg_error;
    }
    if (group.na_intermediate_advanced) {
      nlohmann::json na2 = nlohmann::json::object();
      for (std::size_t i = 0; i < 12; ++i) na2[columns[i]] = (*group.na_intermediate_advanced)[i];
      entry["nA2"] = na2;
    } else {
      entry["nA2"] = nullptr;
    }
    groups.push_back(std::move(entry));
  }
  return {{"groups", groups}};
}

}  // namespace nonword
