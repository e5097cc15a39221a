#include "ncc/log_abstraction.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ncc/errors.hpp"
#include "ncc/text_io.hpp"

namespace ncc {

std::string to_string(EventId id) {
  if (id == kUnknownEvent) return "UNKNOWN";
  return "E" + std::to_string(static_cast<std::uint32_t>(id));
}

std::optional<EventId> parse_event_id(std::string_view text) {
  if (text == "UNKNOWN") return kUnknownEvent;
  if (text.size() < 2 || text.front() != 'E') return std::nullopt;
  std::uint64_t value = 0;
  if (!parse_uint(text.substr(1), value) || value >= std::numeric_limits<std::uint32_t>::max()) {
    return std::nullopt;
  }
  return EventId{static_cast<std::uint32_t>(value)};
}

std::vector<MaskRule> default_mask_rules() {
  return {
      {R"((^|[^0-9.])\d{1,3}(\.\d{1,3}){3}(:\d+)?(?![0-9.]))", "$1<*>"},
      {R"((^|[\s=:("'\[,])(/[\w.\-]+)+(:\d+)?)", "$1<*>"},
      {R"(\b0[xX][0-9a-fA-F]+\b)", "<*>"},
      {R"(\b\d+\b)", "<*>"},
  };
}

void AbstractionConfig::validate() const {
  if (tree_depth < 2) throw ValidationError("tree_depth must be >= 2");
  if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0)) {
    throw ValidationError("similarity_threshold must lie in (0, 1]");
  }
  if (max_children < 1) throw ValidationError("max_children must be >= 1");
  for (const auto& rule : mask_rules) {
    try {
      std::regex re(rule.pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw ValidationError("mask rule '" + rule.pattern + "' does not compile: " + e.what());
    }
  }
}

// ---------------------------------------------------------------------------

Preprocessor::Preprocessor(const std::vector<MaskRule>& rules) {
  rules_.reserve(rules.size());
  for (const auto& rule : rules) {
    rules_.emplace_back(std::regex(rule.pattern, std::regex::ECMAScript | std::regex::optimize),
                        rule.replacement);
  }
}

std::string Preprocessor::mask(std::string_view line) const {
  std::string text(line);
  for (const auto& [re, replacement] : rules_) {
    text = std::regex_replace(text, re, replacement);
  }
  return text;
}

std::vector<std::string> Preprocessor::tokenize(std::string_view line) const {
  const std::string masked = mask(line);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < masked.size()) {
    while (i < masked.size() && std::isspace(static_cast<unsigned char>(masked[i]))) ++i;
    const std::size_t start = i;
    while (i < masked.size() && !std::isspace(static_cast<unsigned char>(masked[i]))) ++i;
    if (i > start) tokens.emplace_back(masked.substr(start, i - start));
  }
  return tokens;
}

std::vector<std::string> preprocess(std::string_view line, const AbstractionConfig& config) {
  return Preprocessor(config.mask_rules).tokenize(line);
}

// ---------------------------------------------------------------------------

std::string LogTemplate::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i].wildcard ? std::string(kWildcard) : tokens[i].text;
  }
  return out;
}

std::size_t LogTemplate::wildcard_count() const {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [](const auto& t) { return t.wildcard; }));
}

double seq_similarity(std::span<const std::string> tokens, const LogTemplate& tmpl) {
  if (tokens.size() != tmpl.tokens.size()) {
    throw std::invalid_argument("seq_similarity: token count differs from template length");
  }
  if (tokens.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& slot = tmpl.tokens[i];
    if (slot.wildcard || slot.text == tokens[i]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(tokens.size());
}

// ---------------------------------------------------------------------------

struct TemplateMiner::Node {
  std::map<std::string, std::unique_ptr<Node>, std::less<>> children;
  std::vector<std::uint32_t> clusters;

  std::size_t literal_children() const {
    return children.size() - (children.count(kWildcard) ? 1 : 0);
  }
};

namespace {

std::string route_key(const std::string& token) {
  if (token == kWildcard) return std::string(kWildcard);
  const bool has_digit =
      std::any_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); });
  return has_digit ? std::string(kWildcard) : token;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string key;
  for (const auto& t : tokens) {
    key += t;
    key += '\x1f';
  }
  return key;
}

LogTemplate make_template(EventId id, const std::vector<std::string>& tokens) {
  LogTemplate tmpl;
  tmpl.id = id;
  tmpl.match_count = 1;
  tmpl.tokens.reserve(tokens.size());
  for (const auto& t : tokens) {
    tmpl.tokens.push_back(t == kWildcard ? TemplateToken::any() : TemplateToken::literal(t));
  }
  return tmpl;
}

std::size_t key_depth(std::size_t tree_depth, std::size_t length) {
  return std::min(tree_depth - 2, length);
}

}  // namespace

TemplateMiner::TemplateMiner(AbstractionConfig config)
    : config_((config.validate(), std::move(config))), preprocessor_(config_.mask_rules) {}

TemplateMiner::TemplateMiner(TemplateMiner&&) noexcept = default;
TemplateMiner& TemplateMiner::operator=(TemplateMiner&&) noexcept = default;
TemplateMiner::~TemplateMiner() = default;

const LogTemplate* TemplateMiner::find(EventId id) const {
  const auto index = static_cast<std::uint32_t>(id);
  if (id == kUnknownEvent || index >= templates_.size()) return nullptr;
  return &templates_[index];
}

const TemplateMiner::Node* TemplateMiner::find_leaf(const std::vector<std::string>& tokens) const {
  const auto root = roots_.find(tokens.size());
  if (root == roots_.end()) return nullptr;
  const Node* node = root->second.get();
  const std::size_t depth = key_depth(config_.tree_depth, tokens.size());
  for (std::size_t i = 0; i < depth; ++i) {
    auto it = node->children.find(route_key(tokens[i]));
    if (it == node->children.end()) it = node->children.find(kWildcard);
    if (it == node->children.end()) return nullptr;
    node = it->second.get();
  }
  return node;
}

TemplateMiner::Node& TemplateMiner::descend_or_create(const std::vector<std::string>& tokens,
                                                      std::vector<std::string>& route) {
  auto& root = roots_[tokens.size()];
  if (!root) root = std::make_unique<Node>();
  Node* node = root.get();
  const std::size_t depth = key_depth(config_.tree_depth, tokens.size());
  route.clear();
  for (std::size_t i = 0; i < depth; ++i) {
    std::string key = route_key(tokens[i]);
    if (!node->children.count(key) && key != kWildcard &&
        node->literal_children() >= config_.max_children) {
      key = std::string(kWildcard);
    }
    auto& child = node->children[key];
    if (!child) child = std::make_unique<Node>();
    node = child.get();
    route.push_back(std::move(key));
  }
  return *node;
}

TemplateMiner::Node& TemplateMiner::insert_route(std::size_t length,
                                                 const std::vector<std::string>& route) {
  auto& root = roots_[length];
  if (!root) root = std::make_unique<Node>();
  Node* node = root.get();
  for (const auto& key : route) {
    auto& child = node->children[key];
    if (!child) child = std::make_unique<Node>();
    node = child.get();
  }
  return *node;
}

std::optional<std::uint32_t> TemplateMiner::best_in_leaf(const Node& leaf,
                                                         const std::vector<std::string>& tokens) const {
  std::optional<std::uint32_t> best;
  double best_sim = -1.0;
  for (const auto index : leaf.clusters) {
    const double sim = seq_similarity(tokens, templates_[index]);
    // Strictly greater keeps the earliest-created template on ties.
    if (sim > best_sim) {
      best_sim = sim;
      best = index;
    }
  }
  if (best && best_sim >= config_.similarity_threshold) return best;
  return std::nullopt;
}

EventId TemplateMiner::parse_line(std::string_view line) {
  if (frozen_) throw std::logic_error("parse_line called on a frozen miner");
  const auto tokens = preprocessor_.tokenize(line);
  if (tokens.empty()) throw std::invalid_argument("parse_line: line has no tokens");
  return train_tokens(tokens);
}

EventId TemplateMiner::train_tokens(const std::vector<std::string>& tokens) {
  const std::string key = join_tokens(tokens);
  if (const auto hit = seen_.find(key); hit != seen_.end()) {
    // The template already covers this exact sequence at every position.
    ++templates_[hit->second].match_count;
    return templates_[hit->second].id;
  }

  std::vector<std::string> route;
  Node& leaf = descend_or_create(tokens, route);
  if (const auto best = best_in_leaf(leaf, tokens)) {
    auto& tmpl = templates_[*best];
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      auto& slot = tmpl.tokens[i];
      if (!slot.wildcard && slot.text != tokens[i]) slot = TemplateToken::any();
    }
    ++tmpl.match_count;
    seen_.emplace(key, *best);
    return tmpl.id;
  }

  const auto index = static_cast<std::uint32_t>(templates_.size());
  templates_.push_back(make_template(EventId{index}, tokens));
  routes_.push_back(std::move(route));
  leaf.clusters.push_back(index);
  seen_.emplace(key, index);
  return EventId{index};
}

EventId TemplateMiner::match_tokens(const std::vector<std::string>& tokens) const {
  if (tokens.empty()) return kUnknownEvent;
  const Node* leaf = find_leaf(tokens);
  if (!leaf) return kUnknownEvent;
  if (const auto best = best_in_leaf(*leaf, tokens)) return templates_[*best].id;
  return kUnknownEvent;
}

EventId TemplateMiner::match_line(std::string_view line) const {
  return match_tokens(preprocessor_.tokenize(line));
}

EventSequence TemplateMiner::parse_log(std::string source, std::span<const std::string> lines) {
  if (frozen_) return match_log(std::move(source), lines);
  EventSequence seq;
  seq.source = std::move(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tokens = preprocessor_.tokenize(lines[i]);
    if (tokens.empty()) continue;
    seq.events.push_back(train_tokens(tokens));
    seq.line_numbers.push_back(i + 1);
  }
  return seq;
}

EventSequence TemplateMiner::match_log(std::string source, std::span<const std::string> lines) const {
  EventSequence seq;
  seq.source = std::move(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tokens = preprocessor_.tokenize(lines[i]);
    if (tokens.empty()) continue;
    seq.events.push_back(match_tokens(tokens));
    seq.line_numbers.push_back(i + 1);
  }
  return seq;
}

std::uint64_t TemplateMiner::fingerprint() const {
  Fnv1a h;
  h.update_u64(config_.tree_depth);
  h.update(format_double(config_.similarity_threshold));
  h.update_u64(config_.max_children);
  for (const auto& rule : config_.mask_rules) {
    h.update(rule.pattern);
    h.update(rule.replacement);
  }
  for (std::size_t i = 0; i < templates_.size(); ++i) {
    h.update_u64(static_cast<std::uint32_t>(templates_[i].id));
    h.update_u64(templates_[i].match_count);
    h.update(templates_[i].text());
    for (const auto& key : routes_[i]) h.update(key);
  }
  return h.digest();
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr std::string_view kTemplatesHeader = "ncc-templates v1";

std::vector<LogTemplate> read_template_lines(std::istream& in, std::optional<std::size_t> count) {
  std::string line;
  if (!std::getline(in, line) || line != kTemplatesHeader) {
    throw FormatError("templates: expected header '" + std::string(kTemplatesHeader) + "'");
  }
  std::vector<LogTemplate> out;
  while ((!count || out.size() < *count) && std::getline(in, line)) {
    if (line.empty() && !count) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 3) throw FormatError("templates: malformed row '" + line + "'");
    LogTemplate tmpl;
    const auto id = parse_event_id(fields[0]);
    if (!id || *id == kUnknownEvent) throw FormatError("templates: bad event_id '" + fields[0] + "'");
    tmpl.id = *id;
    if (!parse_uint(fields[1], tmpl.match_count)) {
      throw FormatError("templates: bad match_count '" + fields[1] + "'");
    }
    for (auto& tok : split(fields[2], ' ')) {
      if (tok.empty()) throw FormatError("templates: empty token in '" + fields[2] + "'");
      tmpl.tokens.push_back(tok == kWildcard ? TemplateToken::any() : TemplateToken::literal(tok));
    }
    out.push_back(std::move(tmpl));
  }
  if (count && out.size() != *count) throw FormatError("templates: truncated template list");
  return out;
}

void expect_field(const std::vector<std::string>& fields, std::string_view name, std::size_t arity) {
  if (fields.empty() || fields[0] != name || fields.size() != arity) {
    throw FormatError("miner: expected field '" + std::string(name) + "'");
  }
}

}  // namespace

void TemplateMiner::write_templates(std::ostream& out) const {
  out << kTemplatesHeader << '\n';
  for (const auto& tmpl : templates_) {
    out << to_string(tmpl.id) << '\t' << tmpl.match_count << '\t' << tmpl.text() << '\n';
  }
}

std::vector<LogTemplate> read_templates(std::istream& in) {
  return read_template_lines(in, std::nullopt);
}

void TemplateMiner::write_state(std::ostream& out) const {
  out << "tree_depth\t" << config_.tree_depth << '\n';
  out << "similarity_threshold\t" << format_double(config_.similarity_threshold) << '\n';
  out << "max_children\t" << config_.max_children << '\n';
  out << "mask_rules\t" << config_.mask_rules.size() << '\n';
  for (const auto& rule : config_.mask_rules) {
    if (rule.pattern.find_first_of("\t\n") != std::string::npos ||
        rule.replacement.find_first_of("\t\n") != std::string::npos) {
      throw ValidationError("mask rules containing tabs or newlines cannot be serialized");
    }
    out << "mask\t" << rule.pattern << '\t' << rule.replacement << '\n';
  }
  out << "templates\t" << templates_.size() << '\n';
  write_templates(out);
  out << "routes\t" << routes_.size() << '\n';
  for (std::size_t i = 0; i < routes_.size(); ++i) {
    out << to_string(templates_[i].id);
    for (const auto& key : routes_[i]) out << '\t' << key;
    out << '\n';
  }
}

TemplateMiner TemplateMiner::read_state(std::istream& in) {
  auto next_fields = [&in](std::string_view name) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("miner: missing field '" + std::string(name) + "'");
    return split(line, '\t');
  };
  auto read_uint = [](const std::string& text, std::string_view name) {
    std::uint64_t v = 0;
    if (!parse_uint(text, v)) throw FormatError("miner: bad value for '" + std::string(name) + "'");
    return v;
  };

  AbstractionConfig config;
  auto f = next_fields("tree_depth");
  expect_field(f, "tree_depth", 2);
  config.tree_depth = read_uint(f[1], "tree_depth");
  f = next_fields("similarity_threshold");
  expect_field(f, "similarity_threshold", 2);
  if (!parse_double(f[1], config.similarity_threshold)) {
    throw FormatError("miner: bad value for 'similarity_threshold'");
  }
  f = next_fields("max_children");
  expect_field(f, "max_children", 2);
  config.max_children = read_uint(f[1], "max_children");
  f = next_fields("mask_rules");
  expect_field(f, "mask_rules", 2);
  const auto rule_count = read_uint(f[1], "mask_rules");
  config.mask_rules.clear();
  for (std::uint64_t i = 0; i < rule_count; ++i) {
    f = next_fields("mask");
    expect_field(f, "mask", 3);
    config.mask_rules.push_back({f[1], f[2]});
  }
  try {
    config.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("miner: invalid config: ") + e.what());
  }

  TemplateMiner miner(std::move(config));
  f = next_fields("templates");
  expect_field(f, "templates", 2);
  const auto count = read_uint(f[1], "templates");
  miner.templates_ = read_template_lines(in, count);
  for (std::size_t i = 0; i < miner.templates_.size(); ++i) {
    if (static_cast<std::uint32_t>(miner.templates_[i].id) != i) {
      throw FormatError("miner: template ids must be dense and ordered");
    }
  }

  f = next_fields("routes");
  expect_field(f, "routes", 2);
  if (read_uint(f[1], "routes") != count) throw FormatError("miner: route count differs from templates");
  for (std::size_t i = 0; i < count; ++i) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("miner: truncated routes");
    auto keys = split(line, '\t');
    const auto id = parse_event_id(keys[0]);
    if (!id || static_cast<std::uint32_t>(*id) != i) throw FormatError("miner: bad route row '" + line + "'");
    keys.erase(keys.begin());
    const std::size_t length = miner.templates_[i].tokens.size();
    if (keys.size() != key_depth(miner.config_.tree_depth, length)) {
      throw FormatError("miner: route depth mismatch for " + to_string(*id));
    }
    Node& leaf = miner.insert_route(length, keys);
    leaf.clusters.push_back(static_cast<std::uint32_t>(i));
    miner.routes_.push_back(std::move(keys));
  }
  miner.frozen_ = true;
  return miner;
}

}  // namespace ncc
