#include "ncc/model.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ncc/errors.hpp"
#include "ncc/text_io.hpp"

namespace ncc {

namespace {

constexpr std::string_view kModelHeader = "ncc-model v1";

void expect_line(std::istream& in, std::string_view expected, std::string_view what) {
  std::string line;
  if (!std::getline(in, line) || line != expected) {
    throw FormatError("model: expected " + std::string(what) + " '" + std::string(expected) + "'");
  }
}

}  // namespace

void Model::write(std::ostream& out) const {
  out << kModelHeader << '\n' << "[miner]\n";
  miner.write_state(out);
  out << "[table]\n";
  table.write(out);
}

Model Model::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("model: empty file");
  if (line != kModelHeader) {
    if (line.rfind("ncc-model ", 0) == 0) {
      throw FormatError("model: unsupported version '" + line.substr(10) + "' (expected v1)");
    }
    throw FormatError("model: expected header '" + std::string(kModelHeader) + "'");
  }
  expect_line(in, "[miner]", "section");
  TemplateMiner miner = TemplateMiner::read_state(in);
  expect_line(in, "[table]", "section");
  ScoreTable table = ScoreTable::read(in);
  for (const auto& [id, row] : table.rows()) {
    if (!miner.find(id)) throw FormatError("model: table row " + to_string(id) + " has no template");
  }
  return Model{std::move(miner), std::move(table)};
}

std::uint64_t Model::fingerprint() const {
  Fnv1a h;
  h.update_u64(miner.fingerprint());
  h.update_u64(table.fingerprint());
  return h.digest();
}

ModelBuild build_model(const Corpus& train, const AbstractionConfig& config, Variant variant) {
  train.validate();
  if (train.failed.empty()) throw ValidationError("training corpus has no failed logs");
  TemplateMiner miner(config);
  ModelBuild b{Model{TemplateMiner(config), ScoreTable{}}, {}, {}, {}};
  b.passed.reserve(train.passed.size());
  b.failed.reserve(train.failed.size());
  for (const auto& log : train.passed) b.passed.push_back(miner.parse_log(log.id, log.lines));
  for (const auto& log : train.failed) b.failed.push_back(miner.parse_log(log.id, log.lines));
  miner.freeze();
  const auto labels = train.labels();
  b.details = build_table(b.passed, b.failed, labels, train.taxonomy, variant);
  b.model.miner = std::move(miner);
  b.model.table = b.details.table;
  return b;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ostringstream out;
  model.write(out);
  write_text_file(path, out.str());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read model " + path.string());
  return Model::read(in);
}

}  // namespace ncc
