#include "ncc/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ncc/lookup_table.hpp"

namespace ncc {

std::vector<std::vector<CauseId>> rg_trials(std::span<const std::uint64_t> train_counts, std::size_t test_size,
                                            std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("rg: need at least one trial");
  const std::uint64_t total = std::accumulate(train_counts.begin(), train_counts.end(), std::uint64_t{0});
  if (total == 0) throw std::invalid_argument("rg: empty training distribution");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<CauseId>> out(trials, std::vector<CauseId>(test_size, 0));
  for (auto& trial : out) {
    for (auto& cause : trial) {
      // Uniform draw in [0, total) mapped onto the cumulative counts.
      std::uint64_t u = rng() % total;
      CauseId j = 0;
      while (u >= train_counts[j]) u -= train_counts[j++];
      cause = j;
    }
  }
  return out;
}

RgResult rg_predict(std::span<const std::uint64_t> train_counts, std::span<const CauseId> truth,
                    std::size_t trials, std::uint64_t seed) {
  RgResult r;
  r.trials = rg_trials(train_counts, truth.size(), trials, seed);
  std::vector<std::pair<double, std::size_t>> scored;
  std::vector<MacroReport> reports;
  reports.reserve(trials);
  for (std::size_t t = 0; t < r.trials.size(); ++t) {
    reports.push_back(evaluate(truth, r.trials[t], train_counts.size()));
    scored.emplace_back(reports.back().f1, t);
  }
  std::sort(scored.begin(), scored.end());
  r.median_trial = scored[(scored.size() - 1) / 2].second;
  r.report = reports[r.median_trial];
  return r;
}

CauseId majority_class(std::span<const std::uint64_t> train_counts) {
  if (std::all_of(train_counts.begin(), train_counts.end(), [](auto c) { return c == 0; })) {
    throw std::invalid_argument("majority_class: no training labels");
  }
  CauseId best = 0;
  for (CauseId j = 1; j < train_counts.size(); ++j) {
    if (train_counts[j] > train_counts[best]) best = j;
  }
  return best;
}

std::vector<CauseId> mcc_predict(std::span<const std::uint64_t> train_counts, std::size_t test_size) {
  return std::vector<CauseId>(test_size, majority_class(train_counts));
}

// ---------------------------------------------------------------------------

KnnIndex::KnnIndex(std::vector<Document> docs, std::size_t causes, KnnConfig config) : config_(config) {
  if (config_.k_neighbors == 0) throw std::invalid_argument("knn: k_neighbors must be >= 1");
  if (docs.empty()) throw std::invalid_argument("knn: no training documents");
  std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.id < b.id; });

  std::map<std::uint32_t, std::uint64_t> df;
  std::vector<std::uint64_t> label_counts(causes, 0);
  for (const auto& d : docs) {
    for (const auto& [term, count] : d.terms) {
      if (count > 0) ++df[term];
    }
    ++label_counts.at(d.label);
  }
  majority_ = majority_class(label_counts);
  const auto n = static_cast<double>(docs.size());
  for (const auto& [term, count] : df) idf_[term] = std::log(n / static_cast<double>(count));

  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (const auto& [term, weight] : weigh(docs[i].terms)) postings_[term].emplace_back(i, weight);
    ids_.push_back(std::move(docs[i].id));
    labels_.push_back(docs[i].label);
  }
}

double KnnIndex::idf(std::uint32_t term) const {
  const auto it = idf_.find(term);
  return it == idf_.end() ? 0.0 : it->second;
}

std::vector<std::pair<std::uint32_t, double>> KnnIndex::weigh(const TermCounts& tf) const {
  std::vector<std::pair<std::uint32_t, double>> v;
  double norm = 0.0;
  for (const auto& [term, count] : tf) {
    const double w = static_cast<double>(count) * idf(term);
    if (w > 0.0) {
      v.emplace_back(term, w);
      norm += w * w;
    }
  }
  norm = std::sqrt(norm);
  for (auto& [term, w] : v) w /= norm;
  return v;
}

std::vector<KnnIndex::Neighbor> KnnIndex::rank(const TermCounts& query) const {
  std::vector<Neighbor> ranked(ids_.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].doc = i;
  for (const auto& [term, w] : weigh(query)) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    for (const auto& [doc, dw] : it->second) ranked[doc].similarity += w * dw;
  }
  // Documents are stored in id order, so a stable sort breaks ties by id.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Neighbor& a, const Neighbor& b) { return a.similarity > b.similarity; });
  return ranked;
}

CauseId KnnIndex::predict(const TermCounts& query) const {
  const auto ranked = rank(query);
  if (ranked.empty() || ranked.front().similarity <= 0.0) return majority_;
  const std::size_t k = std::min(config_.k_neighbors, ranked.size());
  std::map<CauseId, std::pair<std::size_t, std::size_t>> votes;  // label -> (count, best rank)
  for (std::size_t r = 0; r < k; ++r) {
    auto [it, inserted] = votes.try_emplace(labels_[ranked[r].doc], 0, r);
    ++it->second.first;
  }
  CauseId best = votes.begin()->first;
  auto best_vote = votes.begin()->second;
  for (const auto& [label, vote] : votes) {
    if (vote.first > best_vote.first || (vote.first == best_vote.first && vote.second < best_vote.second)) {
      best = label;
      best_vote = vote;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

namespace {

template <typename Fn>
void for_each_term(const std::vector<std::string>& lines, Fn&& fn) {
  for (const auto& line : lines) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) fn(std::string_view(line).substr(start, i - start));
    }
  }
}

}  // namespace

CamIndex CamIndex::train(const Corpus& train, KnnConfig config) {
  CamIndex cam;
  for (const auto& log : train.failed) {
    for_each_term(log.lines, [&](std::string_view term) {
      if (cam.vocabulary_.find(term) == cam.vocabulary_.end()) cam.vocabulary_.emplace(std::string(term), 0);
    });
  }
  std::uint32_t next = 0;
  for (auto& [term, id] : cam.vocabulary_) id = next++;
  std::vector<KnnIndex::Document> docs;
  docs.reserve(train.failed.size());
  for (const auto& log : train.failed) docs.push_back({log.id, cam.vectorize(log.lines), log.cause});
  cam.index_ = KnnIndex(std::move(docs), train.taxonomy.size(), config);
  return cam;
}

TermCounts CamIndex::vectorize(const std::vector<std::string>& lines) const {
  TermCounts tf;
  for_each_term(lines, [&](std::string_view term) {
    const auto it = vocabulary_.find(term);
    if (it != vocabulary_.end()) ++tf[it->second];
  });
  return tf;
}

CauseId CamIndex::predict(const std::vector<std::string>& lines) const { return index_.predict(vectorize(lines)); }

LffIndex LffIndex::train(std::span<const EventSequence> passed, std::span<const EventSequence> failed,
                         std::span<const CauseId> labels, std::size_t causes, KnnConfig config) {
  if (failed.size() != labels.size()) throw std::invalid_argument("lff: one label per failed log");
  LffIndex lff;
  const auto [passed_pool, failed_pool] = collect_pools(passed, failed);
  std::set_difference(failed_pool.events.begin(), failed_pool.events.end(), passed_pool.events.begin(),
                      passed_pool.events.end(), std::inserter(lff.vocabulary_, lff.vocabulary_.end()));
  std::vector<KnnIndex::Document> docs;
  docs.reserve(failed.size());
  for (std::size_t i = 0; i < failed.size(); ++i) {
    docs.push_back({failed[i].source, lff.vectorize(failed[i]), labels[i]});
  }
  lff.index_ = KnnIndex(std::move(docs), causes, config);
  return lff;
}

TermCounts LffIndex::vectorize(const EventSequence& events) const {
  TermCounts tf;
  for (const EventId e : events.events) {
    if (vocabulary_.count(e)) ++tf[static_cast<std::uint32_t>(e)];
  }
  return tf;
}

CauseId LffIndex::predict(const EventSequence& events) const { return index_.predict(vectorize(events)); }

}  // namespace ncc
