#include "ncc/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "ncc/errors.hpp"
#include "ncc/text_io.hpp"

namespace ncc {

namespace fs = std::filesystem;

namespace {

// Draws use raw engine output only.
std::size_t draw_index(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }
double draw_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
bool draw_bool(std::mt19937_64& rng, double p) { return draw_unit(rng) < p; }

constexpr std::array<std::string_view, 4> kSlots = {"{num}", "{ip}", "{hex}", "{path}"};

constexpr std::array<std::string_view, 10> kDirs = {"usr", "local", "opt", "var", "lib",
                                                    "cmd", "etc", "srv", "data", "home"};
constexpr std::array<std::string_view, 6> kFiles = {"cfg.rb",     "main.py", "device.conf",
                                                    "agent.log", "init.sh", "board.xml"};

constexpr std::array<std::string_view, 24> kBenignWords = {
    "starting",  "service", "loaded",   "config",  "session", "opened",  "user",   "view",
    "returned",  "checking", "interface", "status", "ready",   "queue",   "flushed", "connected",
    "heartbeat", "sent",     "module",   "enabled", "step",    "completed", "cache", "synced"};

constexpr std::array<std::string_view, 24> kFailureWords = {
    "error",    "failed",    "timeout",  "refused",   "slave",     "board",  "not",      "in",
    "position", "exception", "assert",   "mismatch",  "missing",   "library", "symbol",  "unresolved",
    "link",     "down",      "abort",    "script",    "argument",  "invalid", "crashed", "rollback"};

std::string letters(std::size_t index) {
  std::string out;
  do {
    out.insert(out.begin(), static_cast<char>('a' + index % 26));
    index /= 26;
  } while (index > 0);
  if (out.size() < 2) out.insert(out.begin(), 'a');
  return out;
}

std::string make_template(std::mt19937_64& rng, std::string tag, const auto& words) {
  std::string out = "[" + tag + "]";
  const std::size_t n_words = 3 + draw_index(rng, 5);
  const std::size_t n_slots = draw_index(rng, 3);
  std::vector<std::string> body;
  for (std::size_t i = 0; i < n_words; ++i) body.emplace_back(words[draw_index(rng, words.size())]);
  for (std::size_t i = 0; i < n_slots; ++i) {
    const auto pos = 1 + draw_index(rng, body.size());
    body.insert(body.begin() + static_cast<std::ptrdiff_t>(pos), std::string(kSlots[draw_index(rng, kSlots.size())]));
  }
  for (const auto& w : body) out += " " + w;
  return out;
}

std::string noise_line(std::mt19937_64& rng) {
  const std::size_t n = 3 + draw_index(rng, 6);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    const std::size_t len = 4 + draw_index(rng, 6);
    for (std::size_t k = 0; k < len; ++k) out += static_cast<char>('a' + draw_index(rng, 26));
  }
  return out;
}

void check_template(const std::string& tmpl, std::vector<std::string>& problems) {
  if (trim(tmpl).empty()) problems.push_back("empty template");
  if (tmpl.find_first_of("\t\n\r") != std::string::npos) {
    problems.push_back("template contains tab or newline: '" + tmpl + "'");
  }
  for (std::size_t pos = tmpl.find('{'); pos != std::string::npos; pos = tmpl.find('{', pos + 1)) {
    const bool known = std::any_of(kSlots.begin(), kSlots.end(),
                                   [&](std::string_view slot) { return tmpl.compare(pos, slot.size(), slot) == 0; });
    if (!known) problems.push_back("unknown slot in template '" + tmpl + "'");
  }
}

std::string join(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace

void SyntheticSpec::validate() const {
  taxonomy.validate();
  const std::size_t k = taxonomy.size();
  std::vector<std::string> problems;
  if (failed_counts.size() != k) problems.push_back("failed_counts must have one entry per cause");
  if (markers.size() != k) problems.push_back("markers must have one set per cause");
  if (min_lines < 1 || min_lines > max_lines) problems.push_back("need 1 <= min_lines <= max_lines");
  for (const double rate : {noise_rate, extra_marker_rate, common_rate, marker_leak_rate}) {
    if (!(rate >= 0.0 && rate <= 1.0)) problems.push_back("rates must lie in [0, 1]");
  }
  std::set<std::string> seen;
  auto claim = [&](const std::string& tmpl, const std::string& owner) {
    check_template(tmpl, problems);
    if (!seen.insert(tmpl).second) problems.push_back("template '" + tmpl + "' is used twice (" + owner + ")");
  };
  for (std::size_t j = 0; j < markers.size(); ++j) {
    if (j < failed_counts.size() && failed_counts[j] > 0 && markers[j].empty()) {
      problems.push_back("cause " + CauseTaxonomy::code(j) + " has failed logs but no marker");
    }
    for (const auto& m : markers[j]) claim(m, "marker of " + CauseTaxonomy::code(j));
  }
  for (const auto& b : benign) claim(b, "benign");
  for (const auto& c : failure_common) claim(c, "failure_common");
  if (!problems.empty()) {
    std::string msg = "invalid synthetic spec:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
}

SyntheticSpec default_synthetic_spec(std::vector<std::size_t> failed_counts, std::size_t passed_count,
                                     std::uint64_t seed, std::size_t markers_per_cause,
                                     std::size_t benign_count, std::size_t common_count) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.taxonomy = CauseTaxonomy::standard();
  if (failed_counts.size() != spec.taxonomy.size()) {
    spec.taxonomy.names.clear();
    for (std::size_t j = 0; j < failed_counts.size(); ++j) spec.taxonomy.names.push_back("cause-" + letters(j));
  }
  spec.failed_counts = std::move(failed_counts);
  spec.passed_count = passed_count;

  std::mt19937_64 rng(seed ^ 0x5eedf00dULL);
  std::size_t tag = 0;
  spec.markers.resize(spec.failed_counts.size());
  for (auto& set : spec.markers) {
    for (std::size_t m = 0; m < markers_per_cause; ++m) {
      set.push_back(make_template(rng, "fault-" + letters(tag++), kFailureWords));
    }
  }
  for (std::size_t b = 0; b < benign_count; ++b) {
    spec.benign.push_back(make_template(rng, "svc-" + letters(tag++), kBenignWords));
  }
  for (std::size_t c = 0; c < common_count; ++c) {
    spec.failure_common.push_back(make_template(rng, "step-" + letters(tag++), kFailureWords));
  }
  return spec;
}

std::string render_template(const std::string& tmpl, std::mt19937_64& rng) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      if (tmpl.compare(i, 5, "{num}") == 0) {
        out += std::to_string(draw_index(rng, 100000));
        i += 5;
        continue;
      }
      if (tmpl.compare(i, 4, "{ip}") == 0) {
        out += "10." + std::to_string(draw_index(rng, 256)) + "." + std::to_string(draw_index(rng, 256)) + "." +
               std::to_string(1 + draw_index(rng, 254));
        i += 4;
        continue;
      }
      if (tmpl.compare(i, 5, "{hex}") == 0) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "0x%06llx", static_cast<unsigned long long>(rng() & 0xFFFFFFULL));
        out += buf;
        i += 5;
        continue;
      }
      if (tmpl.compare(i, 6, "{path}") == 0) {
        const std::size_t depth = 1 + draw_index(rng, 3);
        for (std::size_t d = 0; d < depth; ++d) out += "/" + std::string(kDirs[draw_index(rng, kDirs.size())]);
        out += "/" + std::string(kFiles[draw_index(rng, kFiles.size())]);
        if (draw_bool(rng, 0.5)) out += ":" + std::to_string(1 + draw_index(rng, 999));
        i += 6;
        continue;
      }
    }
    out += tmpl[i++];
  }
  return out;
}

SyntheticCorpus synthesize(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  SyntheticCorpus result;
  result.manifest.spec = spec;
  Corpus& corpus = result.corpus;
  corpus.taxonomy = spec.taxonomy;

  auto build_log = [&](std::vector<std::string> required) {
    const std::size_t span = spec.max_lines - spec.min_lines + 1;
    const std::size_t target = std::max(spec.min_lines + draw_index(rng, span), required.size());
    std::vector<std::string> lines;
    lines.reserve(target);
    for (std::size_t i = required.size(); i < target; ++i) {
      if (spec.benign.empty() || draw_bool(rng, spec.noise_rate)) {
        lines.push_back(noise_line(rng));
      } else {
        lines.push_back(render_template(spec.benign[draw_index(rng, spec.benign.size())], rng));
      }
    }
    for (auto& tmpl : required) {
      const auto pos = draw_index(rng, lines.size() + 1);
      lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(pos), render_template(tmpl, rng));
    }
    return lines;
  };

  char id[32];
  for (std::size_t p = 0; p < spec.passed_count; ++p) {
    std::vector<std::string> required;
    for (std::size_t b = p; b < spec.benign.size(); b += spec.passed_count) required.push_back(spec.benign[b]);
    std::snprintf(id, sizeof(id), "passed-%05zu", p);
    corpus.passed.push_back({id, build_log(std::move(required))});
  }

  std::size_t serial = 0;
  for (CauseId j = 0; j < spec.failed_counts.size(); ++j) {
    for (std::size_t n = 0; n < spec.failed_counts[j]; ++n) {
      const auto& own = spec.markers[j];
      std::vector<std::string> required{own.front()};
      for (std::size_t m = 1; m < own.size(); ++m) {
        if (draw_bool(rng, spec.extra_marker_rate)) required.push_back(own[m]);
      }
      for (const auto& c : spec.failure_common) {
        if (draw_bool(rng, spec.common_rate)) required.push_back(c);
      }
      if (spec.markers.size() > 1 && draw_bool(rng, spec.marker_leak_rate)) {
        CauseId other = draw_index(rng, spec.markers.size() - 1);
        if (other >= j) ++other;
        if (!spec.markers[other].empty()) {
          required.push_back(spec.markers[other][draw_index(rng, spec.markers[other].size())]);
        }
      }
      std::snprintf(id, sizeof(id), "failed-%05zu", serial++);
      corpus.failed.push_back({id, build_log(std::move(required)), j});
    }
  }
  return result;
}

Manifest generate_synthetic(const SyntheticSpec& spec, const fs::path& out_dir) {
  auto result = synthesize(spec);
  write_corpus(result.corpus, out_dir);
  std::ostringstream text;
  result.manifest.write(text);
  write_text_file(out_dir / "manifest.txt", text.str());
  return result.manifest;
}

// ---------------------------------------------------------------------------
// JSON spec files

SyntheticSpec spec_from_json(const nlohmann::json& doc) {
  try {
    const auto counts = doc.at("failed_counts").get<std::vector<std::size_t>>();
    const auto seed = doc.value("seed", std::uint64_t{0});
    SyntheticSpec spec = default_synthetic_spec(counts, doc.value("passed_count", std::size_t{0}), seed,
                                                doc.value("markers_per_cause", std::size_t{3}),
                                                doc.value("benign_count", std::size_t{24}),
                                                doc.value("failure_common_count", std::size_t{3}));
    if (doc.contains("causes")) spec.taxonomy.names = doc.at("causes").get<std::vector<std::string>>();
    if (doc.contains("markers")) spec.markers = doc.at("markers").get<std::vector<std::vector<std::string>>>();
    if (doc.contains("benign")) spec.benign = doc.at("benign").get<std::vector<std::string>>();
    if (doc.contains("failure_common")) spec.failure_common = doc.at("failure_common").get<std::vector<std::string>>();
    spec.noise_rate = doc.value("noise_rate", spec.noise_rate);
    if (doc.contains("lines")) {
      const auto range = doc.at("lines").get<std::vector<std::size_t>>();
      if (range.size() != 2) throw ValidationError("'lines' must be [min, max]");
      spec.min_lines = range[0];
      spec.max_lines = range[1];
    }
    spec.extra_marker_rate = doc.value("extra_marker_rate", spec.extra_marker_rate);
    spec.common_rate = doc.value("common_rate", spec.common_rate);
    spec.marker_leak_rate = doc.value("marker_leak_rate", spec.marker_leak_rate);
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synthetic spec: ") + e.what());
  }
}

nlohmann::json spec_to_json(const SyntheticSpec& spec) {
  return {
      {"seed", spec.seed},
      {"causes", spec.taxonomy.names},
      {"failed_counts", spec.failed_counts},
      {"passed_count", spec.passed_count},
      {"markers", spec.markers},
      {"benign", spec.benign},
      {"failure_common", spec.failure_common},
      {"noise_rate", spec.noise_rate},
      {"lines", {spec.min_lines, spec.max_lines}},
      {"extra_marker_rate", spec.extra_marker_rate},
      {"common_rate", spec.common_rate},
      {"marker_leak_rate", spec.marker_leak_rate},
  };
}

SyntheticSpec read_synthetic_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return spec_from_json(doc);
}

// ---------------------------------------------------------------------------
// Manifest

std::vector<std::pair<std::string, CauseId>> Manifest::marker_causes() const {
  std::vector<std::pair<std::string, CauseId>> out;
  for (CauseId j = 0; j < spec.markers.size(); ++j) {
    for (const auto& m : spec.markers[j]) out.emplace_back(m, j);
  }
  return out;
}

void Manifest::write(std::ostream& out) const {
  out << "ncc-manifest v1\n";
  out << "seed=" << spec.seed << '\n';
  out << "causes=";
  for (std::size_t j = 0; j < spec.taxonomy.size(); ++j) out << (j ? "," : "") << spec.taxonomy.names[j];
  out << '\n';
  out << "failed_counts=" << join(spec.failed_counts) << '\n';
  out << "passed_count=" << spec.passed_count << '\n';
  out << "noise_rate=" << format_double(spec.noise_rate) << '\n';
  out << "lines=" << spec.min_lines << ',' << spec.max_lines << '\n';
  out << "extra_marker_rate=" << format_double(spec.extra_marker_rate) << '\n';
  out << "common_rate=" << format_double(spec.common_rate) << '\n';
  out << "marker_leak_rate=" << format_double(spec.marker_leak_rate) << '\n';
  for (const auto& [tmpl, cause] : marker_causes()) out << "marker=" << cause << '\t' << tmpl << '\n';
  for (const auto& b : spec.benign) out << "benign=" << b << '\n';
  for (const auto& c : spec.failure_common) out << "common=" << c << '\n';
}

Manifest Manifest::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "ncc-manifest v1") {
    throw FormatError("manifest: expected header 'ncc-manifest v1'");
  }
  Manifest m;
  SyntheticSpec& spec = m.spec;
  spec.markers.clear();
  auto number_list = [](const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    for (const auto& part : split(value, ',')) {
      std::uint64_t v = 0;
      if (!parse_uint(part, v)) throw FormatError("manifest: bad value for '" + key + "'");
      out.push_back(static_cast<std::size_t>(v));
    }
    return out;
  };
  auto real = [](const std::string& key, const std::string& value) {
    double v = 0;
    if (!parse_double(value, v)) throw FormatError("manifest: bad value for '" + key + "'");
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("manifest: malformed line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "seed") {
      std::uint64_t v = 0;
      if (!parse_uint(value, v)) throw FormatError("manifest: bad value for 'seed'");
      spec.seed = v;
    } else if (key == "causes") {
      spec.taxonomy.names = split(value, ',');
      spec.markers.resize(spec.taxonomy.size());
    } else if (key == "failed_counts") {
      spec.failed_counts = number_list(key, value);
    } else if (key == "passed_count") {
      spec.passed_count = number_list(key, value).at(0);
    } else if (key == "noise_rate") {
      spec.noise_rate = real(key, value);
    } else if (key == "lines") {
      const auto range = number_list(key, value);
      if (range.size() != 2) throw FormatError("manifest: bad value for 'lines'");
      spec.min_lines = range[0];
      spec.max_lines = range[1];
    } else if (key == "extra_marker_rate") {
      spec.extra_marker_rate = real(key, value);
    } else if (key == "common_rate") {
      spec.common_rate = real(key, value);
    } else if (key == "marker_leak_rate") {
      spec.marker_leak_rate = real(key, value);
    } else if (key == "marker") {
      const auto tab = value.find('\t');
      std::uint64_t cause = 0;
      if (tab == std::string::npos || !parse_uint(value.substr(0, tab), cause) || cause >= spec.markers.size()) {
        throw FormatError("manifest: bad value for 'marker'");
      }
      spec.markers[cause].push_back(value.substr(tab + 1));
    } else if (key == "benign") {
      spec.benign.push_back(value);
    } else if (key == "common") {
      spec.failure_common.push_back(value);
    } else {
      throw FormatError("manifest: unknown field '" + key + "'");
    }
  }
  return m;
}

}  // namespace ncc
