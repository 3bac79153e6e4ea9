#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace nonword {

// Self-reported proficiency: beginner (A1/A2), intermediate (B1/B2),
// advanced (C1/C2).
enum class Proficiency { Beginner, Intermediate, Advanced };

// Stimulus source: German-, English-, Swedish-looking non-words, or fillers
// (existing words).
enum class StimulusGroup { DE = 0, EN = 1, SV = 2, FI = 3 };
inline constexpr std::array<StimulusGroup, 4> kStimulusGroups = {StimulusGroup::DE, StimulusGroup::EN,
                                                                  StimulusGroup::SV, StimulusGroup::FI};

enum class Response { Accept, Reject };

char proficiency_code(Proficiency p);
std::optional<Proficiency> parse_proficiency(std::string_view code);
std::string_view group_name(StimulusGroup g);
std::optional<StimulusGroup> parse_group(std::string_view name);
std::string_view response_name(Response r);
std::optional<Response> parse_response(std::string_view name);

struct TrialRecord {
  std::string rater_id;
  std::string l1;
  Proficiency proficiency = Proficiency::Intermediate;
  std::string word;
  StimulusGroup group = StimulusGroup::FI;
  Response response = Response::Accept;
  double rt_seconds = 0.0;

  bool correct() const {
    return group == StimulusGroup::FI ? response == Response::Accept : response == Response::Reject;
  }
};

inline constexpr std::string_view kTrialCsvHeader = "rater_id,l1,proficiency,word,group,response,rt_seconds";

// Throws InputFormatError naming the line of the first bad row.
std::vector<TrialRecord> read_trials_csv(std::istream& in);
void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records);

nlohmann::json to_json(const TrialRecord& record);
TrialRecord trial_from_json(const nlohmann::json& j);

struct Rater {
  std::string id;
  std::string l1;
  Proficiency proficiency;
};

// Raters in order of first appearance.
std::vector<Rater> raters_of(std::span<const TrialRecord> records);

// Percent correct per (rater, group): rejections for non-words, acceptances
// for fillers. Cells without trials are nullopt.
struct AccuracyTable {
  std::vector<Rater> raters;
  std::map<std::string, std::array<std::optional<double>, 4>> percent;
};

AccuracyTable accuracy(std::span<const TrialRecord> records);

// Reaction-time means of one (rater, group) cell. A response class with no
// trials has mean 0 (the "never accepted" convention).
struct CellStats {
  double reject_mean = 0.0;
  double accept_mean = 0.0;
  double combined_mean = 0.0;  // over all trials, not the midpoint of the two
  std::size_t reject_count = 0;
  std::size_t accept_count = 0;

  std::size_t count() const { return reject_count + accept_count; }
};

struct RaterGroupStats {
  std::vector<Rater> raters;
  std::map<std::string, std::array<CellStats, 4>> cells;

  const CellStats& at(const std::string& rater, StimulusGroup g) const {
    return cells.at(rater)[static_cast<std::size_t>(g)];
  }
};

RaterGroupStats group_reaction_times(std::span<const TrialRecord> records);

using RaterMeans = std::map<std::string, std::map<std::string, double>>;

// Divides each rater's means by that rater's mean of means, then averages
// every column over raters. Every rater must have every column; a missing
// cell throws AnalysisError naming it.
std::map<std::string, double> normalized_average(const RaterMeans& means);

// Keeps records whose proficiency is allowed; throws AnalysisError when
// nothing remains.
std::vector<TrialRecord> filter_by_proficiency(std::span<const TrialRecord> records,
                                               const std::set<Proficiency>& allowed);

// Column order of the per-rater reaction-time table: D0 D1 DC E0 ... FC.
std::array<std::string, 12> rt_columns();

// Normalized averages over the 12 x0/x1/xC cells. Cells with no trials are
// left out of each rater's mean of means and count as 0 in the column
// average, matching how the published table reports them.
std::array<double, 12> normalized_rt_cells(const RaterGroupStats& stats);

struct L1Analysis {
  std::string l1;
  std::vector<Rater> raters;
  RaterGroupStats stats;
  AccuracyTable accuracy;
  // Over the combined means of the four groups; absent if a rater lacks one.
  std::optional<std::map<std::string, double>> navg;
  std::string navg_error;
  std::array<double, 12> na{};
  // Same, excluding beginners; absent when only beginners are present.
  std::optional<std::array<double, 12>> na_intermediate_advanced;
};

struct Analysis {
  std::vector<L1Analysis> groups;  // by rater L1, first appearance order
};

Analysis analyze(std::span<const TrialRecord> records);

void write_analysis_csv(std::ostream& out, const Analysis& analysis);
nlohmann::json to_json(const Analysis& analysis);

}  // namespace nonword
