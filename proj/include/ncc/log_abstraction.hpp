#pragma once

// Online fixed-depth parse-tree template mining (Drain style). Raw log lines
// are masked, tokenized on whitespace, routed through a tree keyed by token
// count and leading tokens, and matched against the template groups at the
// leaf. Every log becomes a sequence of event ids.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ncc {

enum class EventId : std::uint32_t {};

// Reserved id for lines a frozen miner cannot match. Never scored.
inline constexpr EventId kUnknownEvent{std::numeric_limits<std::uint32_t>::max()};

// "E17", or "UNKNOWN" for the reserved id.
std::string to_string(EventId id);
std::optional<EventId> parse_event_id(std::string_view text);

inline constexpr std::string_view kWildcard = "<*>";

// A regex rewrite applied to a raw line before tokenization. `replacement`
// uses ECMAScript format syntax ($1 refers to the first capture group).
struct MaskRule {
  std::string pattern;
  std::string replacement;

  bool operator==(const MaskRule&) const = default;
};

// IPv4 addresses, absolute paths with an optional :line suffix, hexadecimal
// constants, bare integers. All map to "<*>".
std::vector<MaskRule> default_mask_rules();

struct AbstractionConfig {
  std::size_t tree_depth = 4;
  double similarity_threshold = 0.4;
  std::size_t max_children = 100;
  std::vector<MaskRule> mask_rules = default_mask_rules();

  // Throws ValidationError when an invariant does not hold or a mask
  // pattern does not compile.
  void validate() const;

  bool operator==(const AbstractionConfig&) const = default;
};

// Compiled mask rules plus whitespace tokenization.
class Preprocessor {
 public:
  explicit Preprocessor(const std::vector<MaskRule>& rules);

  std::string mask(std::string_view line) const;
  std::vector<std::string> tokenize(std::string_view line) const;

 private:
  std::vector<std::pair<std::regex, std::string>> rules_;
};

std::vector<std::string> preprocess(std::string_view line, const AbstractionConfig& config);

struct TemplateToken {
  std::string text;  // empty for wildcards
  bool wildcard = false;

  static TemplateToken literal(std::string text) { return {std::move(text), false}; }
  static TemplateToken any() { return {{}, true}; }

  bool operator==(const TemplateToken&) const = default;
};

struct LogTemplate {
  EventId id{};
  std::vector<TemplateToken> tokens;
  std::uint64_t match_count = 0;

  // Tokens joined by single spaces, wildcards rendered as "<*>".
  std::string text() const;
  std::size_t wildcard_count() const;
};

// Fraction of positions where the token equals the template literal or the
// template slot is a wildcard. Throws std::invalid_argument on a length
// mismatch.
double seq_similarity(std::span<const std::string> tokens, const LogTemplate& tmpl);

struct EventSequence {
  std::string source;
  std::vector<EventId> events;
  // 1-based line number in the source file for each event.
  std::vector<std::size_t> line_numbers;

  std::size_t size() const { return events.size(); }
};

// Miner state: the parse tree and the template registry.
//
// Training calls (parse_line, parse_log on an unfrozen miner) mutate the
// state and need exclusive access. After freeze() every method is const and
// the miner can be shared between threads; unmatched lines map to
// kUnknownEvent.
class TemplateMiner {
 public:
  explicit TemplateMiner(AbstractionConfig config = {});

  TemplateMiner(TemplateMiner&&) noexcept;
  TemplateMiner& operator=(TemplateMiner&&) noexcept;
  TemplateMiner(const TemplateMiner&) = delete;
  TemplateMiner& operator=(const TemplateMiner&) = delete;
  ~TemplateMiner();

  // Training mode. Merges the line into the most similar template of its
  // leaf, or registers a new one. Throws std::logic_error when frozen and
  // std::invalid_argument for a line without tokens.
  EventId parse_line(std::string_view line);

  // Read-only lookup. Returns kUnknownEvent when no template in the leaf
  // reaches the similarity threshold.
  EventId match_line(std::string_view line) const;

  // Applies parse_line (or match_line when frozen) to every non-empty line.
  EventSequence parse_log(std::string source, std::span<const std::string> lines);
  EventSequence match_log(std::string source, std::span<const std::string> lines) const;

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  const AbstractionConfig& config() const { return config_; }
  const Preprocessor& preprocessor() const { return preprocessor_; }

  std::size_t size() const { return templates_.size(); }
  const std::vector<LogTemplate>& templates() const { return templates_; }
  const LogTemplate* find(EventId id) const;

  // Hash over configuration, templates, counts, and tree routes.
  std::uint64_t fingerprint() const;

  // Template registry export: header "ncc-templates v1", then one
  // "E<id>\t<match_count>\t<template>" line per template.
  void write_templates(std::ostream& out) const;

  // Full state (config, templates, tree routes), enough to rebuild an
  // equivalent frozen miner with read_state.
  void write_state(std::ostream& out) const;
  static TemplateMiner read_state(std::istream& in);

 private:
  struct Node;

  EventId train_tokens(const std::vector<std::string>& tokens);
  EventId match_tokens(const std::vector<std::string>& tokens) const;
  const Node* find_leaf(const std::vector<std::string>& tokens) const;
  Node& descend_or_create(const std::vector<std::string>& tokens, std::vector<std::string>& route);
  Node& insert_route(std::size_t length, const std::vector<std::string>& route);
  std::optional<std::uint32_t> best_in_leaf(const Node& leaf, const std::vector<std::string>& tokens) const;

  AbstractionConfig config_;
  Preprocessor preprocessor_;
  std::map<std::size_t, std::unique_ptr<Node>> roots_;
  std::vector<LogTemplate> templates_;
  std::vector<std::vector<std::string>> routes_;
  // Exact token sequences seen during training -> template index.
  std::unordered_map<std::string, std::uint32_t> seen_;
  bool frozen_ = false;
};

// Reads a standalone template registry export. Throws FormatError.
std::vector<LogTemplate> read_templates(std::istream& in);

}  // namespace ncc
