#include "ncc/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "ncc/baselines.hpp"
#include "ncc/corpus.hpp"
#include "ncc/errors.hpp"
#include "ncc/evaluation.hpp"
#include "ncc/model.hpp"
#include "ncc/predictor.hpp"
#include "ncc/synthetic.hpp"
#include "ncc/text_io.hpp"

namespace ncc::cli {

namespace fs = std::filesystem;

namespace {

struct AbstractionFlags {
  std::size_t tree_depth = 4;
  double similarity = 0.4;
  std::size_t max_children = 100;

  AbstractionConfig config() const {
    AbstractionConfig c;
    c.tree_depth = tree_depth;
    c.similarity_threshold = similarity;
    c.max_children = max_children;
    c.validate();
    return c;
  }
};

void add_abstraction_flags(CLI::App* cmd, AbstractionFlags& f) {
  cmd->add_option("--tree-depth", f.tree_depth, "Parse tree depth (>= 2)")->capture_default_str();
  cmd->add_option("--similarity", f.similarity, "Template similarity threshold in (0, 1]")->capture_default_str();
  cmd->add_option("--max-children", f.max_children, "Branch cap per tree node")->capture_default_str();
}

struct CorpusFlags {
  std::string dir;
  std::string labels;
  std::string causes;

  fs::path labels_path() const { return labels.empty() ? fs::path(dir) / "labels.csv" : fs::path(labels); }
  CauseTaxonomy taxonomy() const {
    return causes.empty() ? CauseTaxonomy::standard() : CauseTaxonomy::from_list(causes);
  }
};

void add_corpus_flags(CLI::App* cmd, CorpusFlags& f, bool with_causes) {
  cmd->add_option("--corpus", f.dir, "Corpus directory with passed/ and failed/")->required();
  cmd->add_option("--labels", f.labels, "Labels CSV (default: <corpus>/labels.csv)");
  if (with_causes) cmd->add_option("--causes", f.causes, "Comma-separated cause names (default: the four standard causes)");
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, std::string_view what) {
  if (!seed) throw ValidationError("--seed is required for " + std::string(what));
  return *seed;
}

std::size_t resolve_jobs(std::size_t jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

struct GenOptions {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
  SyntheticSpec spec = read_synthetic_spec(o.spec);
  if (o.seed) spec.seed = *o.seed;
  generate_synthetic(spec, o.out);
  std::size_t failed = 0;
  for (const auto n : spec.failed_counts) failed += n;
  const fs::path manifest = fs::path(o.out) / "manifest.txt";
  out << "wrote " << spec.passed_count << " passed and " << failed << " failed logs to " << o.out << '\n';
  out << manifest.string() << '\n';
  return kOk;
}

struct TrainOptions {
  CorpusFlags corpus;
  AbstractionFlags abstraction;
  std::string out;
  std::string variant = "full";
  std::optional<double> test_fraction;
  std::optional<std::uint64_t> seed;
  std::string templates_out;
};

int cmd_train(const TrainOptions& o, std::ostream& out) {
  Corpus corpus = load_corpus(o.corpus.dir, o.corpus.labels_path(), o.corpus.taxonomy());
  if (o.test_fraction) {
    corpus = split(corpus, *o.test_fraction, require_seed(o.seed, "--test-fraction")).first;
  }
  const auto build = build_model(corpus, o.abstraction.config(), parse_variant(o.variant));
  save_model(build.model, o.out);
  if (!o.templates_out.empty()) {
    std::ostringstream text;
    build.model.miner.write_templates(text);
    write_text_file(o.templates_out, text.str());
  }
  const auto& table = build.model.table;
  out << "model: " << o.out << '\n';
  out << "templates: " << build.model.miner.size() << '\n';
  out << "table: " << table.size() << " events x " << table.causes() << " causes (variant "
      << to_string(table.variant()) << ")\n";
  out << "training logs: " << corpus.passed.size() << " passed, " << table.total() << " failed\n";
  for (CauseId j = 0; j < table.causes(); ++j) {
    out << "  " << std::left << std::setw(28) << table.taxonomy().label(j) << std::right << " N_j=" << std::setw(6)
        << table.per_cause()[j] << "  icf=" << format_double(table.icf()[j]) << '\n';
  }
  return kOk;
}

struct PredictOptions {
  std::string model;
  std::string input;
  std::size_t jobs = 1;
  std::string format = "text";
  std::size_t max_flagged = 10;
};

int cmd_predict(const PredictOptions& o, std::ostream& out) {
  const Model model = load_model(o.model);
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(o.input, ec)) {
    for (const auto& entry : fs::directory_iterator(o.input)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
  } else if (fs::is_regular_file(o.input, ec)) {
    files.push_back(o.input);
  } else {
    throw IoError("no such log file or directory: " + o.input);
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.stem().string() < b.stem().string(); });

  std::vector<PredictionReport> reports(files.size());
  std::vector<std::string> failures(files.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        reports[i] = predict_log(model, files[i].stem().string(), read_lines(files[i]));
      } catch (const IoError& e) {
        failures[i] = e.what();
      }
    }
  };
  const std::size_t jobs = std::min(resolve_jobs(o.jobs), std::max<std::size_t>(1, files.size()));
  std::vector<std::thread> threads;
  const std::size_t chunk = (files.size() + jobs - 1) / std::max<std::size_t>(jobs, 1);
  for (std::size_t t = 0; t < jobs && t * chunk < files.size(); ++t) {
    threads.emplace_back(work, t * chunk, std::min(files.size(), (t + 1) * chunk));
  }
  for (auto& th : threads) th.join();
  for (const auto& f : failures) {
    if (!f.empty()) throw IoError(f);
  }

  const auto& taxonomy = model.table.taxonomy();
  if (o.format == "json") {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : reports) doc.push_back(report_to_json(r, taxonomy));
    out << doc.dump(2) << '\n';
  } else {
    for (const auto& r : reports) write_report_text(out, r, taxonomy, o.max_flagged);
  }
  return kOk;
}

struct EvalOptions {
  std::string model;
  CorpusFlags corpus;
  std::string train_corpus;
  std::string train_labels;
  std::optional<double> test_fraction;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> baselines;
  std::size_t k_neighbors = 5;
  std::size_t rg_trials = 100;
  std::size_t jobs = 1;
  std::string json_out;
  bool confusion = false;
};

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  const Model model = load_model(o.model);
  const CauseTaxonomy& taxonomy = model.table.taxonomy();
  const Corpus full = load_corpus(o.corpus.dir, o.corpus.labels_path(), taxonomy);

  std::optional<Corpus> train;
  Corpus test;
  if (o.test_fraction) {
    auto [tr, te] = split(full, *o.test_fraction, require_seed(o.seed, "--test-fraction"));
    train = std::move(tr);
    test = std::move(te);
  } else {
    test = full;
  }
  if (test.failed.empty()) throw ValidationError("test corpus has no failed logs");

  bool need_train = false;
  for (const auto& b : o.baselines) {
    if (b != "rg" && b != "mcc" && b != "cam" && b != "lff") throw ValidationError("unknown baseline '" + b + "'");
    if (b == "cam" || b == "lff") need_train = true;
    if (b == "rg") require_seed(o.seed, "the rg baseline");
  }
  if (need_train && !train) {
    if (o.train_corpus.empty()) {
      throw ValidationError("cam/lff need training logs: pass --train-corpus or --test-fraction");
    }
    const fs::path labels = o.train_labels.empty() ? fs::path(o.train_corpus) / "labels.csv" : fs::path(o.train_labels);
    train = load_corpus(o.train_corpus, labels, taxonomy);
  }

  const auto truth = test.labels();
  const std::size_t k = taxonomy.size();
  std::vector<std::pair<std::string, MacroReport>> results;
  const auto ncc_predictions = predict_corpus(model, test, resolve_jobs(o.jobs));
  results.emplace_back("NCChecker", evaluate(truth, ncc_predictions, k));

  const KnnConfig knn{o.k_neighbors};
  for (const auto& b : o.baselines) {
    if (b == "rg") {
      results.emplace_back("RG", rg_predict(model.table.per_cause(), truth, o.rg_trials, *o.seed).report);
    } else if (b == "mcc") {
      results.emplace_back("MCC", evaluate(truth, mcc_predict(model.table.per_cause(), truth.size()), k));
    } else if (b == "cam") {
      const auto cam = CamIndex::train(*train, knn);
      std::vector<CauseId> pred;
      for (const auto& log : test.failed) pred.push_back(cam.predict(log.lines));
      results.emplace_back("CAM", evaluate(truth, pred, k));
    } else if (b == "lff") {
      TemplateMiner miner(model.miner.config());
      std::vector<EventSequence> passed, failed;
      for (const auto& log : train->passed) passed.push_back(miner.parse_log(log.id, log.lines));
      for (const auto& log : train->failed) failed.push_back(miner.parse_log(log.id, log.lines));
      miner.freeze();
      const auto lff = LffIndex::train(passed, failed, train->labels(), k, knn);
      std::vector<CauseId> pred;
      for (const auto& log : test.failed) pred.push_back(lff.predict(miner.match_log(log.id, log.lines)));
      results.emplace_back("LFF", evaluate(truth, pred, k));
    }
  }
  // Baselines first, the model last.
  std::rotate(results.begin(), results.begin() + 1, results.end());

  std::vector<std::pair<std::string, const MacroReport*>> rows;
  for (const auto& [name, r] : results) rows.emplace_back(name, &r);
  out << "test logs: " << truth.size() << '\n' << '\n';
  write_macro_table(out, rows);
  out << '\n';
  write_class_table(out, taxonomy, rows);
  if (o.confusion) {
    out << "\nNCChecker confusion matrix\n";
    write_confusion(out, results.back().second.matrix, taxonomy);
  }
  if (!o.json_out.empty()) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& [name, r] : results) {
      for (auto& rec : report_records(name, r, taxonomy)) doc.push_back(std::move(rec));
    }
    write_json_file(o.json_out, doc);
  }
  return kOk;
}

struct AblateOptions {
  CorpusFlags corpus;
  AbstractionFlags abstraction;
  double test_fraction = 0.1;
  std::optional<std::uint64_t> seed;
  std::string json_out;
};

int cmd_ablate(const AblateOptions& o, std::ostream& out) {
  const Corpus full = load_corpus(o.corpus.dir, o.corpus.labels_path(), o.corpus.taxonomy());
  const auto [train, test] = split(full, o.test_fraction, require_seed(o.seed, "ablate"));
  if (test.failed.empty()) throw ValidationError("test split has no failed logs");
  const auto config = o.abstraction.config();

  std::vector<AblationRun> runs;
  for (const auto v : {Variant::drop1, Variant::drop2, Variant::drop3, Variant::full}) {
    runs.push_back(run_ablation(train, test, v, config));
  }
  const auto& drop1 = runs[0];
  const auto& drop2 = runs[1];
  const auto& drop3 = runs[2];
  const auto& full_run = runs[3];

  out << "train failed logs: " << train.failed.size() << ", test failed logs: " << test.failed.size() << '\n' << '\n';
  std::vector<std::pair<std::string, const MacroReport*>> rows;
  for (const auto& r : runs) rows.emplace_back(std::string(display_name(r.variant)), &r.report);
  write_macro_table(out, rows);
  out << '\n';
  write_class_table(out, full.taxonomy, rows);

  const std::vector<StructuralCheck> checks = {
      check_drop1_superset(full_run.build.details, drop1.build.details),
      check_drop2_bypass(drop2.build.details),
      check_drop3_scaling(full_run.build.model.table, drop3.build.model.table),
  };
  out << "\nstructural checks\n";
  bool ok = true;
  for (const auto& c : checks) {
    out << "  [" << (c.passed ? "ok" : "FAILED") << "] " << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  if (!o.json_out.empty()) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : runs) {
      for (auto& rec : report_records(std::string(display_name(r.variant)), r.report, full.taxonomy)) {
        doc.push_back(std::move(rec));
      }
    }
    write_json_file(o.json_out, doc);
  }
  return ok ? kOk : kValidationError;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Failure-cause prediction for test logs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Optional TOML/INI file; command-line flags override it");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus with planted markers");
  gen_cmd->add_option("--spec", gen.spec, "JSON spec file")->required();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Override the spec seed");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Build a model from a labeled corpus");
  add_corpus_flags(train_cmd, train.corpus, true);
  add_abstraction_flags(train_cmd, train.abstraction);
  train_cmd->add_option("--out", train.out, "Model file to write")->required();
  train_cmd->add_option("--variant", train.variant, "full, drop1, drop2 or drop3")->capture_default_str();
  train_cmd->add_option("--test-fraction", train.test_fraction, "Train only on the train side of this split");
  train_cmd->add_option("--seed", train.seed, "Split seed");
  train_cmd->add_option("--templates-out", train.templates_out, "Also export the template registry");

  PredictOptions predict;
  auto* predict_cmd = app.add_subcommand("predict", "Predict the failure cause of logs");
  predict_cmd->add_option("--model", predict.model, "Model file")->required();
  predict_cmd->add_option("--input", predict.input, "Log file or directory of logs")->required();
  predict_cmd->add_option("--jobs", predict.jobs, "Parallel workers (0 = all cores)")->capture_default_str();
  predict_cmd->add_option("--format", predict.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  predict_cmd->add_option("--max-flagged", predict.max_flagged, "Flagged lines shown per log in text output")
      ->capture_default_str();

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model and baselines on labeled failed logs");
  eval_cmd->add_option("--model", eval.model, "Model file")->required();
  add_corpus_flags(eval_cmd, eval.corpus, false);
  eval_cmd->add_option("--train-corpus", eval.train_corpus, "Training corpus for the cam/lff baselines");
  eval_cmd->add_option("--train-labels", eval.train_labels, "Labels of --train-corpus");
  eval_cmd->add_option("--test-fraction", eval.test_fraction, "Evaluate on the test side of this split");
  eval_cmd->add_option("--seed", eval.seed, "Split and random-guess seed");
  eval_cmd->add_option("--baselines", eval.baselines, "Any of rg,mcc,cam,lff")->delimiter(',');
  eval_cmd->add_option("--k-neighbors", eval.k_neighbors, "Neighbors voting in cam/lff")->capture_default_str();
  eval_cmd->add_option("--rg-trials", eval.rg_trials, "Random-guess repetitions")->capture_default_str();
  eval_cmd->add_option("--jobs", eval.jobs, "Parallel workers (0 = all cores)")->capture_default_str();
  eval_cmd->add_option("--json", eval.json_out, "Also write machine-readable records");
  eval_cmd->add_flag("--confusion", eval.confusion, "Print the confusion matrix");

  AblateOptions ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Compare the full model with its three ablations");
  add_corpus_flags(ablate_cmd, ablate.corpus, true);
  add_abstraction_flags(ablate_cmd, ablate.abstraction);
  ablate_cmd->add_option("--test-fraction", ablate.test_fraction, "Test split fraction")->capture_default_str();
  ablate_cmd->add_option("--seed", ablate.seed, "Split seed");
  ablate_cmd->add_option("--json", ablate.json_out, "Also write machine-readable records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*train_cmd) return cmd_train(train, out);
    if (*predict_cmd) return cmd_predict(predict, out);
    if (*eval_cmd) return cmd_eval(eval, out);
    if (*ablate_cmd) return cmd_ablate(ablate, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
  return kValidationError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> copy = args;
  std::vector<char*> argv;
  argv.reserve(copy.size() + 1);
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(copy.size()), argv.data(), out, err);
}

}  // namespace ncc::cli
