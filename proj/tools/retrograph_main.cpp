//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "retrograph/chem/smiles.hpp"
#include "retrograph/error.hpp"
#include "retrograph/eval.hpp"
#include "retrograph/pipeline.hpp"
#include "retrograph/reaction/vocab.hpp"

using namespace retro;

namespace {

// Reads key=value lines ('#' comments) and turns them into --key=value
// tokens placed before the command-line flags, so flags take precedence.
std::vector<std::string> config_tokens(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file " + path);
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    line = trim(line);
    if (line.empty())
      continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

// Splices config-file tokens in after the subcommand name.
std::vector<std::string> expand_config(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> out;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (path.empty() || out.empty())
    return out;
  std::vector<std::string> tokens = config_tokens(path);
  out.insert(out.begin() + 1, tokens.begin(), tokens.end());
  return out;
}

struct TrainOptions {
  std::string train, val, out, log, vocab;
  std::uint64_t seed = 0;
  int hidden = 512;
  std::optional<int> t_a;
  int t_e = 7;
  bool brics = true;
  bool type_known = false;
  int epochs = 150;
  int batch = 256;
  double lr = 1e-3;
  double stop_at = 2.0;
  int threads = 1;
};

void add_train_options(CLI::App *sub, TrainOptions &o, bool synthon) {
  sub->add_option("--train", o.train, "Training reactions")->required()->check(CLI::ExistingFile);
  sub->add_option("--val", o.val, "Validation reactions (default: the training set)")->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "Checkpoint directory")->required();
  sub->add_option("--log", o.log, "JSON-lines log (default: <out>/train_log.jsonl)");
  sub->add_option("--seed", o.seed, "Random seed")->required()->envname("RETROGRAPH_SEED");
  sub->add_option("--hidden", o.hidden, "Hidden dimension")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--t-a", o.t_a, "GMPN iterations (default 7/5 by mode)")->check(CLI::NonNegativeNumber);
  sub->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str()->check(CLI::NonNegativeNumber);
  sub->add_option("--batch", o.batch, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--lr", o.lr, "Learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--stop-at", o.stop_at, "Stop once the validation metric reaches this value");
  sub->add_flag("--type-known", o.type_known, "Append the reaction-type one-hot to atom features");
  sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  if (synthon) {
    sub->add_option("--vocab", o.vocab, "Substructure vocabulary TSV")->required()->check(CLI::ExistingFile);
  } else {
    sub->add_option("--t-e", o.t_e, "FMPN iterations")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_flag("--brics,!--no-brics", o.brics, "Use BRICS fragment enrichment")->capture_default_str();
  }
}

std::vector<rxn::LabeledReaction> load_labeled(const std::string &path, rxn::ExtractionStats *stats) {
  std::vector<std::string> errors;
  std::vector<rxn::ReactionRecord> records = rxn::read_reactions(path, &errors);
  for (const std::string &e: errors)
    std::cerr << "warning: " << e << "\n";
  return rxn::label_reactions(records, stats);
}

nlohmann::json stats_json(const rxn::ExtractionStats &s) {
  return { { "bf", s.coverage.bf },
           { "bc", s.coverage.bc },
           { "a", s.coverage.a },
           { "unsupported", s.coverage.unsupported },
           { "supported_fraction", s.coverage.supported_fraction() },
           { "decomposition_errors", s.decomposition_errors },
           { "other_errors", s.other_errors } };
}

model::TrainConfig train_config(const TrainOptions &o, const char *prefix, const nlohmann::json &meta) {
  model::TrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch;
  tc.lr = o.lr;
  tc.seed = o.seed;
  tc.stop_at = o.stop_at;
  tc.checkpoint_dir = o.out;
  tc.log_path = o.log.empty() ? o.out + "/train_log.jsonl" : o.log;
  tc.prefix = prefix;
  tc.meta = meta;
  return tc;
}

void ensure_dir(const std::string &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw ConfigError("cannot create directory " + dir);
}

int run_train_center(const TrainOptions &o) {
  model::EncoderConfig ec;
  ec.hidden = o.hidden;
  ec.type_known = o.type_known;
  ec.t_a = o.t_a.value_or(default_center_t_a(o.type_known));
  ec.t_e = o.t_e;
  ec.use_brics = o.brics;
  rxn::ExtractionStats st;
  std::vector<rxn::LabeledReaction> train = load_labeled(o.train, &st);
  int skipped = 0;
  std::vector<model::CenterExample> tr = center_examples(train, ec, &skipped);
  std::vector<model::CenterExample> va;
  if (!o.val.empty())
    va = center_examples(load_labeled(o.val, nullptr), ec, nullptr);
  ensure_dir(o.out);
  model::CenterModel m(ec);
  nn::ParamStore store;
  m.init(store, o.seed);
  nlohmann::json meta = encoder_meta(ec);
  meta["module"] = "center";
  model::TrainResult r = model::train_center(m, store, tr, va, train_config(o, kCenterPrefix, meta));
  nlohmann::json summary = { { "module", "center" },  { "examples", tr.size() },      { "skipped", skipped },
                             { "extraction", stats_json(st) }, { "best_epoch", r.best_epoch },
                             { "best_top1", r.best_metric } };
  std::cout << summary.dump() << "\n";
  return 0;
}

int run_train_synthon(const TrainOptions &o) {
  model::EncoderConfig ec;
  ec.hidden = o.hidden;
  ec.type_known = o.type_known;
  ec.t_a = o.t_a.value_or(default_synthon_t_a(o.type_known));
  ec.use_brics = false;
  rxn::SubstructureVocab vocab = rxn::SubstructureVocab::read_tsv(o.vocab);
  rxn::ExtractionStats st;
  std::vector<rxn::LabeledReaction> train = load_labeled(o.train, &st);
  int skipped = 0;
  std::vector<model::CompletionExample> tr = completion_examples(train, vocab, ec, &skipped);
  std::vector<model::CompletionExample> va;
  if (!o.val.empty())
    va = completion_examples(load_labeled(o.val, nullptr), vocab, ec, nullptr);
  ensure_dir(o.out);
  model::SynthonModel m(ec, vocab.size());
  nn::ParamStore store;
  m.init(store, o.seed);
  nlohmann::json meta = encoder_meta(ec);
  meta["module"] = "synthon";
  meta["vocab_size"] = vocab.size();
  model::TrainResult r = model::train_synthon(m, store, tr, va, train_config(o, kSynthonPrefix, meta));
  nlohmann::json summary = { { "module", "synthon" }, { "examples", tr.size() },      { "skipped", skipped },
                             { "extraction", stats_json(st) }, { "best_epoch", r.best_epoch },
                             { "best_trace_accuracy", r.best_metric } };
  std::cout << summary.dump() << "\n";
  return 0;
}

struct PredictOptions {
  std::string center, synthon, vocab, product, in, out;
  int k = 10, n = 10, max_steps = 30, type = 0, threads = 0;
  bool pruned_beam = false;
};

struct Query {
  chem::MolGraph product;
  std::string key;
  int type = 0;
};

std::vector<Query> read_queries(const PredictOptions &o) {
  std::vector<Query> out;
  auto add = [&](const std::string &text, int type) {
    Query q;
    std::string smiles = text;
    if (auto arrow = text.find(">>"); arrow != std::string::npos) {
      rxn::ReactionRecord r = rxn::parse_reaction(text);
      q.product = r.product;
      q.type = r.reaction_type;
    } else {
      q.product = chem::parse_smiles(smiles);
      q.type = type;
    }
    if (o.type > 0)
      q.type = o.type;
    q.product.clear_map_numbers();
    q.key = chem::write_smiles(q.product);
    out.push_back(std::move(q));
  };
  if (!o.product.empty())
    add(o.product, o.type);
  if (!o.in.empty()) {
    std::ifstream in(o.in);
    if (!in)
      throw ConfigError("cannot open " + o.in);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r')
        line.pop_back();
      if (!line.empty())
        add(line, 0);
    }
  }
  return out;
}

int run_predict(const PredictOptions &o) {
  if (o.product.empty() && o.in.empty())
    throw ConfigError("predict needs --product or --in");
  LoadedModels models = load_models(o.center, o.synthon, o.vocab);
  model::Predictor pred = models.predictor();
  model::InferenceConfig ic;
  ic.k = o.k;
  ic.n = o.n;
  ic.max_steps = o.max_steps;
  ic.pruned_beam = o.pruned_beam;
  std::vector<Query> queries = read_queries(o);
  nn::tune_allocator();

  std::vector<std::string> blocks(queries.size());
  std::vector<std::string> failures(queries.size());
  auto work = [&](std::size_t i) {
    std::ostringstream os;
    try {
      write_predictions(os, queries[i].key, model::predict(pred, queries[i].product, queries[i].type, ic));
    } catch (const Error &e) {
      failures[i] = e.what();
    }
    blocks[i] = os.str();
  };
  int threads = o.threads > 0 ? o.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (threads <= 1 || queries.size() <= 1) {
    for (std::size_t i = 0; i < queries.size(); ++i)
      work(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = static_cast<std::size_t>(t); i < queries.size(); i += static_cast<std::size_t>(threads))
          work(i);
      });
    }
    for (std::thread &th: pool)
      th.join();
  }

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file)
      throw ConfigError("cannot write " + o.out);
  }
  std::ostream &os = o.out.empty() ? std::cout : file;
  write_prediction_header(os);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    os << blocks[i];
    if (!failures[i].empty())
      std::cerr << "warning: " << queries[i].key << ": " << failures[i] << "\n";
  }
  return 0;
}

struct EvalOptions {
  std::string pred, gold, out, diversity;
  int clusters = 10;
  std::uint64_t seed = 0;
};

int run_evaluate(const EvalOptions &o) {
  std::map<std::string, std::vector<PredictionRow>> preds = read_predictions(o.pred);
  std::vector<std::string> errors;
  std::vector<rxn::ReactionRecord> gold = rxn::read_reactions(o.gold, &errors);
  for (const std::string &e: errors)
    std::cerr << "warning: " << e << "\n";
  const std::vector<int> ks = { 1, 3, 5, 10 };
  std::map<int, std::pair<std::vector<std::vector<std::string>>, std::vector<std::string>>> by_class;
  std::vector<std::vector<std::string>> all_pred;
  std::vector<std::string> all_gold;
  for (const rxn::ReactionRecord &r: gold) {
    std::vector<std::string> ranked;
    auto it = preds.find(molecule_key(r.product));
    if (it != preds.end()) {
      for (const PredictionRow &row: it->second)
        ranked.push_back(row.reactants);
    }
    std::string g = molecule_key(r.reactants);
    all_pred.push_back(ranked);
    all_gold.push_back(g);
    by_class[r.reaction_type].first.push_back(ranked);
    by_class[r.reaction_type].second.push_back(g);
  }
  std::ostringstream csv;
  csv << "subset,records,top1,top3,top5,top10\n";
  auto row = [&](const std::string &name, const std::vector<std::vector<std::string>> &p,
                 const std::vector<std::string> &g) {
    std::vector<double> acc = eval::topk_accuracy(p, g, ks);
    csv << name << "," << g.size();
    for (double a: acc)
      csv << "," << a;
    csv << "\n";
  };
  row("all", all_pred, all_gold);
  for (const auto &[cls, pg]: by_class) {
    if (cls > 0)
      row("class_" + std::to_string(cls), pg.first, pg.second);
  }
  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(o.out);
    if (!f)
      throw ConfigError("cannot write " + o.out);
    f << csv.str();
  }

  if (!o.diversity.empty()) {
    std::vector<eval::ProductDiversity> div;
    for (const auto &[product, rows]: preds) {
      eval::ProductDiversity d;
      d.product = product;
      std::vector<chem::MolGraph> graphs;
      std::set<std::string> centers;
      for (std::size_t i = 0; i < rows.size() && i < 10; ++i) {
        graphs.push_back(chem::parse_smiles(rows[i].reactants));
        centers.insert(rows[i].center.substr(0, rows[i].center.find(';')));
      }
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        for (std::size_t j = i + 1; j < graphs.size(); ++j)
          d.similarities.push_back(eval::reaction_similarity(graphs[i], graphs[j]));
      }
      d.num_centers = static_cast<int>(centers.size());
      div.push_back(std::move(d));
    }
    eval::DiversityReport rep = eval::diversity_cluster(div, o.clusters, o.seed);
    std::ofstream f(o.diversity);
    if (!f)
      throw ConfigError("cannot write " + o.diversity);
    f << eval::diversity_csv(div, rep);
  }
  return 0;
}

int run_vocab(const std::string &in, const std::string &out, const std::string &stats_path) {
  rxn::ExtractionStats st;
  std::vector<rxn::LabeledReaction> labeled = load_labeled(in, &st);
  rxn::SubstructureVocab vocab = rxn::build_vocab(labeled);
  vocab.write_tsv(out);
  if (!stats_path.empty()) {
    std::ofstream f(stats_path);
    if (!f)
      throw ConfigError("cannot write " + stats_path);
    f << rxn::coverage_csv(st.coverage);
  }
  nlohmann::json summary = stats_json(st);
  summary["vocab_size"] = vocab.size();
  summary["labeled"] = labeled.size();
  std::cout << summary.dump() << "\n";
  return 0;
}

int run_stats(const std::string &in, const std::string &out) {
  rxn::ExtractionStats st;
  load_labeled(in, &st);
  std::string csv = rxn::coverage_csv(st.coverage);
  if (out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream f(out);
    if (!f)
      throw ConfigError("cannot write " + out);
    f << csv;
  }
  std::cerr << stats_json(st).dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{ "retrograph: two-step retrosynthesis with learned reaction centers and synthon completion" };
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::string vocab_in, vocab_out, vocab_stats;
  CLI::App *vocab = app.add_subcommand("vocab", "Build the substructure vocabulary and coverage statistics");
  vocab->add_option("--in", vocab_in, "Reactions")->required()->check(CLI::ExistingFile);
  vocab->add_option("--out", vocab_out, "Vocabulary TSV")->required();
  vocab->add_option("--stats", vocab_stats, "Coverage CSV");

  TrainOptions tc_opts, ts_opts;
  ts_opts.epochs = 100;
  CLI::App *tc = app.add_subcommand("train-center", "Train the reaction center module");
  add_train_options(tc, tc_opts, false);
  CLI::App *ts = app.add_subcommand("train-synthon", "Train the synthon completion module");
  add_train_options(ts, ts_opts, true);

  PredictOptions po;
  CLI::App *pr = app.add_subcommand("predict", "Predict ranked reactant sets");
  pr->add_option("--center", po.center, "Center checkpoint directory")->required()->check(CLI::ExistingDirectory);
  pr->add_option("--synthon", po.synthon, "Synthon checkpoint directory")->required()->check(CLI::ExistingDirectory);
  pr->add_option("--vocab", po.vocab, "Vocabulary TSV")->required()->check(CLI::ExistingFile);
  pr->add_option("--product", po.product, "Product SMILES");
  pr->add_option("--in", po.in, "File of product SMILES or reaction lines")->check(CLI::ExistingFile);
  pr->add_option("--out", po.out, "Output TSV (default: stdout)");
  pr->add_option("--k", po.k, "Synthon candidates")->capture_default_str()->check(CLI::PositiveNumber);
  pr->add_option("--n", po.n, "Reactant sets")->capture_default_str()->check(CLI::PositiveNumber);
  pr->add_option("--max-steps", po.max_steps, "Actions per completion")->capture_default_str()->check(
    CLI::PositiveNumber);
  pr->add_option("--type", po.type, "Reaction type 1..10 for type-known models")->check(CLI::Range(0, 10));
  pr->add_flag("--pruned-beam", po.pruned_beam, "Prune each round to the top N entries");
  pr->add_option("--threads", po.threads, "Worker threads (default: logical cores)")->check(
    CLI::NonNegativeNumber);

  EvalOptions eo;
  CLI::App *ev = app.add_subcommand("evaluate", "Top-k accuracy and diversity reports");
  ev->add_option("--pred", eo.pred, "Prediction TSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--gold", eo.gold, "Reactions with ground truth")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", eo.out, "Accuracy CSV (default: stdout)");
  ev->add_option("--diversity", eo.diversity, "Diversity cluster CSV");
  ev->add_option("--clusters", eo.clusters, "K-means clusters")->capture_default_str()->check(CLI::PositiveNumber);
  ev->add_option("--seed", eo.seed, "K-means seed")->envname("RETROGRAPH_SEED");
  int eval_threads = 1;
  ev->add_option("--threads", eval_threads, "Worker threads (evaluation runs on one)");

  std::string stats_in, stats_out;
  CLI::App *stats = app.add_subcommand("stats", "Reaction center coverage statistics");
  stats->add_option("--in", stats_in, "Reactions")->required()->check(CLI::ExistingFile);
  stats->add_option("--out", stats_out, "Coverage CSV (default: stdout)");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0)
      return app.exit(e);
    app.exit(e);
    return 2;
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*vocab)
      return run_vocab(vocab_in, vocab_out, vocab_stats);
    if (*tc)
      return run_train_center(tc_opts);
    if (*ts)
      return run_train_synthon(ts_opts);
    if (*pr)
      return run_predict(po);
    if (*ev)
      return run_evaluate(eo);
    if (*stats)
      return run_stats(stats_in, stats_out);
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
