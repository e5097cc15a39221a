#include "ncc/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <ostream>
#include <stdexcept>

namespace ncc {

namespace {

void require_final(const ScoreTable& table) {
  if (table.stage() != TableStage::final_) throw std::logic_error("prediction needs a final-stage table");
}

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

std::vector<double> score_log(const ScoreTable& table, const EventSequence& events) {
  require_final(table);
  std::vector<double> scores(table.causes(), 0.0);
  std::set<EventId> distinct(events.events.begin(), events.events.end());
  for (const EventId e : distinct) {
    const ScoreRow* row = table.find(e);
    if (!row) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) scores[j] += row->scores[j];
  }
  return scores;
}

Prediction predict(const ScoreTable& table, const EventSequence& events) {
  require_final(table);
  Prediction p;
  p.scores = score_log(table, events);

  std::map<EventId, Contributor> by_event;
  for (std::size_t i = 0; i < events.events.size(); ++i) {
    const EventId e = events.events[i];
    const ScoreRow* row = table.find(e);
    if (!row) continue;
    auto& c = by_event[e];
    c.event = e;
    c.max_score = *std::max_element(row->scores.begin(), row->scores.end());
    c.lines.push_back(events.line_numbers[i]);
  }
  for (auto& [e, c] : by_event) p.contributors.push_back(std::move(c));
  std::stable_sort(p.contributors.begin(), p.contributors.end(),
                   [](const Contributor& a, const Contributor& b) { return a.max_score > b.max_score; });

  const bool all_zero = std::all_of(p.scores.begin(), p.scores.end(), [](double s) { return s == 0.0; });
  if (all_zero) {
    p.fallback_used = true;
    p.cause = table.majority_cause();
    p.contributors.clear();
    return p;
  }
  const auto& icf = table.icf();
  CauseId best = 0;
  for (CauseId j = 1; j < p.scores.size(); ++j) {
    if (nearly_equal(p.scores[j], p.scores[best])) {
      if (icf[j] > icf[best]) best = j;
    } else if (p.scores[j] > p.scores[best]) {
      best = j;
    }
  }
  p.cause = best;
  return p;
}

std::vector<FlaggedLine> flag_lines(const Prediction& prediction, const ScoreTable& table,
                                    const TemplateMiner& miner) {
  std::vector<FlaggedLine> out;
  if (prediction.fallback_used) return out;
  struct Ranked {
    const Contributor* c;
    double score;
  };
  std::vector<Ranked> ranked;
  for (const auto& c : prediction.contributors) {
    const ScoreRow* row = table.find(c.event);
    if (!row) continue;
    const double score = row->scores.at(prediction.cause);
    if (score > 0.0) ranked.push_back({&c, score});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.c->event < b.c->event;
  });
  for (const auto& r : ranked) {
    const LogTemplate* tmpl = miner.find(r.c->event);
    const std::string text = tmpl ? tmpl->text() : std::string{};
    for (const auto line : r.c->lines) out.push_back({line, r.c->event, text, r.score});
  }
  return out;
}

PredictionReport predict_log(const Model& model, const std::string& log_id, const std::vector<std::string>& lines) {
  PredictionReport report;
  report.log_id = log_id;
  const EventSequence events = model.miner.match_log(log_id, lines);
  report.prediction = predict(model.table, events);
  report.flagged = flag_lines(report.prediction, model.table, model.miner);
  return report;
}

void write_report_text(std::ostream& out, const PredictionReport& report, const CauseTaxonomy& taxonomy,
                       std::size_t max_flagged) {
  const auto& p = report.prediction;
  out << report.log_id << ": " << taxonomy.label(p.cause);
  if (p.fallback_used) out << " (fallback: no known failure events)";
  out << '\n' << "  scores:";
  for (std::size_t j = 0; j < p.scores.size(); ++j) {
    out << ' ' << CauseTaxonomy::code(j) << '=' << std::fixed << std::setprecision(4) << p.scores[j];
  }
  out << std::defaultfloat << '\n';
  const std::size_t shown = std::min(max_flagged, report.flagged.size());
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& f = report.flagged[i];
    out << "  line " << f.line << " [" << to_string(f.event) << " " << std::fixed << std::setprecision(4)
        << f.score << std::defaultfloat << "] " << f.template_text << '\n';
  }
  if (shown < report.flagged.size()) out << "  ... " << report.flagged.size() - shown << " more flagged lines\n";
}

nlohmann::json report_to_json(const PredictionReport& report, const CauseTaxonomy& taxonomy) {
  const auto& p = report.prediction;
  nlohmann::json flagged = nlohmann::json::array();
  for (const auto& f : report.flagged) {
    flagged.push_back({{"line", f.line}, {"event", to_string(f.event)}, {"template", f.template_text}, {"score", f.score}});
  }
  return {
      {"log_id", report.log_id},
      {"cause", CauseTaxonomy::code(p.cause)},
      {"cause_name", taxonomy.names.at(p.cause)},
      {"scores", p.scores},
      {"fallback", p.fallback_used},
      {"flagged", flagged},
  };
}

}  // namespace ncc
