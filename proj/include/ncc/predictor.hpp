#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "ncc/corpus.hpp"
#include "ncc/log_abstraction.hpp"
#include "ncc/lookup_table.hpp"
#include "ncc/model.hpp"

namespace ncc {

struct Contributor {
  EventId event{};
  double max_score = 0.0;            // largest cell of the event's row
  std::vector<std::size_t> lines;    // 1-based, ascending
};

struct Prediction {
  CauseId cause = 0;
  std::vector<double> scores;
  // Sorted by max_score descending, then event id.
  std::vector<Contributor> contributors;
  bool fallback_used = false;
};

// Sum of the rows of the distinct in-table events of the log. Each event
// counts once however many lines it covers. Requires a final-stage table.
std::vector<double> score_log(const ScoreTable& table, const EventSequence& events);

// Argmax of score_log. Scores within a relative 1e-9 of each other tie; ties
// go to the cause with the larger icf, then the lower id. An all-zero score
// vector falls back to the majority training cause.
Prediction predict(const ScoreTable& table, const EventSequence& events);

struct FlaggedLine {
  std::size_t line = 0;
  EventId event{};
  std::string template_text;
  double score = 0.0;  // cell in the predicted cause's column
};

// Lines of the contributing events, strongest evidence for the predicted
// cause first. Events with a zero cell in that column are not flagged.
std::vector<FlaggedLine> flag_lines(const Prediction& prediction, const ScoreTable& table,
                                    const TemplateMiner& miner);

struct PredictionReport {
  std::string log_id;
  Prediction prediction;
  std::vector<FlaggedLine> flagged;
};

// Frozen-mode parse plus prediction and line flagging.
PredictionReport predict_log(const Model& model, const std::string& log_id, const std::vector<std::string>& lines);

void write_report_text(std::ostream& out, const PredictionReport& report, const CauseTaxonomy& taxonomy,
                       std::size_t max_flagged = 10);
nlohmann::json report_to_json(const PredictionReport& report, const CauseTaxonomy& taxonomy);

}  // namespace ncc
