#include "annotator/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <map>
#include <set>

#include "annotator/annotate.hpp"
#include "annotator/config.hpp"
#include "annotator/corpus.hpp"
#include "annotator/embeddings.hpp"
#include "annotator/errors.hpp"
#include "annotator/evaluate.hpp"
#include "annotator/llm.hpp"
#include "annotator/splitter.hpp"
#include "annotator/stats.hpp"
#include "annotator/util.hpp"
#include "annotator/vectorstore.hpp"

namespace annotator {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<Sentence> load_split_file(const fs::path& path,
                                      const ConllParseOptions& opts) {
  return parse_conll(read_file(path), opts);
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::string field;
  for (char c : s) {
    if (c == ',') {
      if (!trim(field).empty()) out.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (!trim(field).empty()) out.push_back(trim(field));
  return out;
}

// ---------------------------------------------------------------- ingest --

struct IngestArgs {
  std::string train, valid, test;
  std::size_t tag_col = 1;
  bool iob1 = false;
  std::string name = "corpus";
  std::string out_dir = ".";
  bool do_export = false;
};

int cmd_ingest(const IngestArgs& args) {
  if (args.train.empty() && args.valid.empty() && args.test.empty())
    throw ConfigError("ingest needs at least one of --train/--valid/--test");

  ConllParseOptions opts;
  opts.tag_column = args.tag_col;
  opts.iob1_to_bio = args.iob1;

  RunManifest manifest("ingest");
  Corpus corpus;
  corpus.name = args.name;
  if (!args.train.empty()) {
    corpus.train = load_split_file(args.train, opts);
    manifest.add_input(args.train);
  }
  if (!args.valid.empty()) {
    corpus.valid = load_split_file(args.valid, opts);
    manifest.add_input(args.valid);
  }
  if (!args.test.empty()) {
    corpus.test = load_split_file(args.test, opts);
    manifest.add_input(args.test);
  }
  corpus.label_set = collect_label_set(corpus);

  const DatasetStats stats = corpus_stats(corpus);
  const std::string stats_json = dataset_stats_to_json(stats, corpus.name);
  const fs::path out_dir(args.out_dir);
  write_file_atomic(out_dir / "stats.json", stats_json);
  manifest.add_output(out_dir / "stats.json");
  std::cout << stats_json;

  if (args.do_export) {
    auto export_split = [&](const char* name, const std::vector<Sentence>& s) {
      if (s.empty()) return;
      const fs::path p = out_dir / (std::string(name) + ".txt");
      write_file_atomic(p, serialize_conll(s));
      manifest.add_output(p);
    };
    export_split("train", corpus.train);
    export_split("valid", corpus.valid);
    export_split("test", corpus.test);
  }
  manifest.set_config({{"name", args.name},
                       {"tag_col", std::to_string(args.tag_col)},
                       {"iob1", args.iob1 ? "true" : "false"}});
  manifest.write(out_dir / "manifest.json");
  return 0;
}

// ----------------------------------------------------------------- split --

struct SplitArgs {
  std::string train;
  std::size_t tag_col = 1;
  bool iob1 = false;
  long long train_size = -1;
  double fraction = 0.30;
  std::uint64_t seed = 42;
  std::string out_dir = ".";
};

int cmd_split(const SplitArgs& args) {
  RunManifest manifest("split");
  std::size_t n = 0;
  if (args.train_size > 0) {
    n = static_cast<std::size_t>(args.train_size);
  } else if (!args.train.empty()) {
    ConllParseOptions opts;
    opts.tag_column = args.tag_col;
    opts.iob1_to_bio = args.iob1;
    n = load_split_file(args.train, opts).size();
    manifest.add_input(args.train);
  } else {
    throw ConfigError("split needs --train-size or --train");
  }

  const SplitResult split =
      split_sample_space(n, SplitSpec{args.fraction, args.seed});
  const fs::path out = fs::path(args.out_dir) / "split.json";
  save_split(split, out);
  manifest.add_output(out);
  manifest.set_config({{"train_size", std::to_string(n)},
                       {"fraction", std::to_string(args.fraction)},
                       {"seed", std::to_string(args.seed)}});
  manifest.write(fs::path(args.out_dir) / "manifest.json");
  std::cout << "sample_space=" << split.sample_space.size()
            << " targets=" << split.targets.size() << "\n";
  return 0;
}

// ----------------------------------------------------------------- embed --

struct EmbedArgs {
  std::string provider = "local-test";
  std::string model;
  std::string endpoint;
  std::string api_key_env = "ANNOTATOR_EMBED_KEY";
  std::size_t dim = 64;
  std::size_t batch_size = 64;
  std::string cache;
  std::string corpus_file;
  std::size_t tag_col = 1;
  bool iob1 = false;
  std::string texts_file;
  std::string index_out;
  std::string out_dir = ".";
};

EmbeddingProviderSpec embed_spec_from(const std::string& provider,
                                      const std::string& model,
                                      const std::string& endpoint,
                                      const std::string& api_key_env,
                                      std::size_t dim, std::size_t batch_size) {
  EmbeddingProviderSpec spec;
  if (provider == "local-test") {
    spec.kind = EmbeddingKind::local_test;
  } else if (provider == "remote") {
    spec.kind = EmbeddingKind::remote;
    spec.endpoint = endpoint;
  } else {
    throw ConfigError("unknown embedding provider '" + provider +
                      "' (expected local-test|remote)");
  }
  if (!model.empty()) spec.model_id = model;
  if (!api_key_env.empty()) spec.api_key_env = api_key_env;
  spec.dim = dim;
  spec.batch_size = batch_size;
  return spec;
}

int cmd_embed(const EmbedArgs& args) {
  RunManifest manifest("embed");
  std::vector<std::string> texts;
  std::vector<int> ids;
  if (!args.corpus_file.empty()) {
    ConllParseOptions opts;
    opts.tag_column = args.tag_col;
    opts.iob1_to_bio = args.iob1;
    const auto sentences = load_split_file(args.corpus_file, opts);
    manifest.add_input(args.corpus_file);
    for (const auto& s : sentences) {
      texts.push_back(sentence_text(s));
      ids.push_back(s.id);
    }
  } else if (!args.texts_file.empty()) {
    manifest.add_input(args.texts_file);
    std::istringstream in(read_file(args.texts_file));
    std::string line;
    int id = 0;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      texts.push_back(line);
      ids.push_back(id++);
    }
  } else {
    throw ConfigError("embed needs --corpus or --texts");
  }
  if (texts.empty()) throw ConfigError("nothing to embed");

  const auto spec =
      embed_spec_from(args.provider, args.model, args.endpoint,
                      args.api_key_env, args.dim, args.batch_size);
  auto provider = make_embedding_provider(spec);
  EmbeddingCache cache(args.cache.empty() ? fs::path{} : fs::path(args.cache));
  auto vectors = embed_batch(*provider, args.cache.empty() ? nullptr : &cache,
                             texts, spec.batch_size);

  if (!args.index_out.empty()) {
    std::vector<std::pair<int, EmbeddingVector>> items;
    for (std::size_t i = 0; i < vectors.size(); ++i)
      items.emplace_back(ids[i], vectors[i]);
    VectorIndex::build(items).save(args.index_out);
    manifest.add_output(args.index_out);
  }
  if (!args.cache.empty()) manifest.add_output(args.cache);
  manifest.set_config({{"provider", args.provider},
                       {"model", provider->model_id()},
                       {"dim", std::to_string(spec.dim)},
                       {"texts", std::to_string(texts.size())}});
  manifest.write(fs::path(args.out_dir) / "manifest.json");
  std::cout << "embedded " << texts.size() << " texts (dim " << spec.dim
            << ", cache " << (args.cache.empty() ? "off" : args.cache)
            << ")\n";
  return 0;
}

// -------------------------------------------------------------- annotate --

struct AnnotateArgs {
  std::string config_file;
  // overrides; empty/-1 means "not set on the command line"
  std::string train, name, labels, mode, provider, endpoint, model;
  std::string embed_provider, embed_model, embed_endpoint, cache;
  std::string split_file, out_dir, replay;
  long long tag_col = -1, m = -1, max_inflight = -1, max_output_tokens = -1;
  long long embed_dim = -1, embed_batch = -1;
  double fraction = -1.0, failure_threshold = -1.0, temperature = -1.0;
  long long seed = -1;
  int iob1 = -1, icl_resample = -1, structured = -1;
};

int cmd_annotate(const AnnotateArgs& args) {
  KeyValueConfig config;
  if (!args.config_file.empty())
    config = KeyValueConfig::load(args.config_file);

  auto override_str = [&](const char* key, const std::string& v) {
    if (!v.empty()) config.set(key, v);
  };
  auto override_int = [&](const char* key, long long v) {
    if (v >= 0) config.set(key, std::to_string(v));
  };
  auto override_double = [&](const char* key, double v) {
    if (v >= 0.0) config.set(key, std::to_string(v));
  };
  auto override_flag = [&](const char* key, int v) {
    if (v >= 0) config.set(key, v ? "true" : "false");
  };
  override_str("train", args.train);
  override_str("name", args.name);
  override_str("labels", args.labels);
  override_str("mode", args.mode);
  override_str("provider", args.provider);
  override_str("endpoint", args.endpoint);
  override_str("model", args.model);
  override_str("embed_provider", args.embed_provider);
  override_str("embed_model", args.embed_model);
  override_str("embed_endpoint", args.embed_endpoint);
  override_str("cache", args.cache);
  override_str("split", args.split_file);
  override_str("out_dir", args.out_dir);
  if (!args.replay.empty()) config.set("provider", "replay:" + args.replay);
  override_int("tag_col", args.tag_col);
  override_int("context_size", args.m);
  override_int("max_inflight", args.max_inflight);
  override_int("max_output_tokens", args.max_output_tokens);
  override_int("embed_dim", args.embed_dim);
  override_int("embed_batch_size", args.embed_batch);
  override_int("seed", args.seed);
  override_double("fraction", args.fraction);
  override_double("failure_threshold", args.failure_threshold);
  override_double("temperature", args.temperature);
  override_flag("iob1", args.iob1);
  override_flag("icl_resample_per_target", args.icl_resample);
  override_flag("structured_output", args.structured);
  reject_embedded_secrets(config);

  const std::string train_path = config.get("train");
  if (train_path.empty()) throw ConfigError("annotate needs a train corpus");
  const fs::path out_dir(config.get("out_dir", "."));

  RunManifest manifest("annotate");
  manifest.add_input(train_path);

  ConllParseOptions opts;
  opts.tag_column = static_cast<std::size_t>(config.get_int("tag_col", 1));
  opts.iob1_to_bio = config.get_bool("iob1", false);

  Corpus corpus;
  corpus.name = config.get("name", "corpus");
  corpus.train = load_split_file(train_path, opts);
  corpus.label_set = collect_label_set(corpus);

  SplitResult split;
  if (config.has("split") && !config.get("split").empty()) {
    split = load_split(config.get("split"));
    manifest.add_input(config.get("split"));
  } else {
    SplitSpec spec;
    spec.fraction = config.get_double("fraction", 0.30);
    spec.seed = static_cast<std::uint64_t>(config.get_int("seed", 42));
    split = split_sample_space(corpus.train.size(), spec);
  }

  AnnotateRunConfig run_config;
  run_config.mode = prompt_mode_from_name(config.get("mode", "rag"));
  run_config.context_size =
      static_cast<std::size_t>(config.get_int("context_size", 25));
  run_config.icl_resample_per_target =
      config.get_bool("icl_resample_per_target", false);
  run_config.failure_threshold = config.get_double("failure_threshold", 0.05);
  run_config.max_inflight =
      static_cast<std::size_t>(config.get_int("max_inflight", 4));
  run_config.embed_batch_size =
      static_cast<std::size_t>(config.get_int("embed_batch_size", 64));
  run_config.params.temperature = config.get_double("temperature", 0.0);
  run_config.params.seed = static_cast<std::uint64_t>(config.get_int("seed", 42));
  run_config.params.model_id = config.get("model", "gpt-4o-mini-2024-07-18");
  run_config.params.max_output_tokens =
      static_cast<int>(config.get_int("max_output_tokens", 1024));
  run_config.params.response_format =
      config.get_bool("structured_output", true)
          ? ResponseFormat::structured_entities
          : ResponseFormat::free_text;
  if (config.has("labels"))
    run_config.labels = split_csv_list(config.get("labels"));

  ChatEndpointSpec endpoint;
  endpoint.endpoint = config.get("endpoint");
  endpoint.api_key_env = config.get("api_key_env", "ANNOTATOR_API_KEY");
  endpoint.structured_output = config.get_bool("structured_output", true);

  const std::string provider_spec = config.get("provider", "mock:echo-gold");
  auto provider = make_completion_provider(provider_spec, corpus, endpoint);

  std::unique_ptr<EmbeddingProvider> embedder;
  std::unique_ptr<EmbeddingCache> cache;
  if (run_config.mode == PromptMode::rag) {
    const auto spec = embed_spec_from(
        config.get("embed_provider", "local-test"), config.get("embed_model"),
        config.get("embed_endpoint"),
        config.get("embed_api_key_env", "ANNOTATOR_EMBED_KEY"),
        static_cast<std::size_t>(config.get_int("embed_dim", 64)),
        run_config.embed_batch_size);
    embedder = make_embedding_provider(spec);
    const std::string cache_path = config.get("cache");
    cache = std::make_unique<EmbeddingCache>(
        cache_path.empty() ? fs::path{} : fs::path(cache_path));
  }

  RunOutputPaths outputs;
  outputs.annotated_conll = out_dir / "annotated.txt";
  outputs.gold_targets_conll = out_dir / "targets_gold.txt";
  outputs.report_json = out_dir / "run_report.json";
  outputs.prompts_jsonl = out_dir / "prompts.jsonl";
  outputs.transcript_jsonl = out_dir / "transcript.jsonl";

  save_split(split, out_dir / "split.json");

  const AnnotationRun run =
      annotate_corpus(corpus, split, run_config, *provider, embedder.get(),
                      cache.get(), outputs);

  manifest.set_config(config.values());
  manifest.add_output(out_dir / "split.json");
  manifest.add_output(outputs.annotated_conll);
  manifest.add_output(outputs.gold_targets_conll);
  manifest.add_output(outputs.report_json);
  manifest.add_output(outputs.prompts_jsonl);
  manifest.add_output(outputs.transcript_jsonl);
  manifest.write(out_dir / "manifest.json");

  std::cout << "annotated " << run.report.annotated << "/"
            << run.report.targets << " targets (mode " << run.report.mode
            << ", provider " << run.report.provider << ")\n"
            << "outputs in " << out_dir.string() << "\n";
  return 0;
}

// -------------------------------------------------------------- evaluate --

struct EvaluateArgs {
  std::string pred, gold, split_file, out_dir = ".";
  std::size_t tag_col = 1;
  std::vector<std::string> meta;
};

int cmd_evaluate(const EvaluateArgs& args) {
  if (args.pred.empty() || args.gold.empty())
    throw ConfigError("evaluate needs --pred and --gold");
  RunManifest manifest("evaluate");
  manifest.add_input(args.pred);
  manifest.add_input(args.gold);

  ConllParseOptions opts;
  opts.tag_column = args.tag_col;
  auto pred = load_split_file(args.pred, {});
  auto gold = load_split_file(args.gold, opts);

  if (!args.split_file.empty()) {
    manifest.add_input(args.split_file);
    const SplitResult split = load_split(args.split_file);
    std::map<int, const Sentence*> by_id;
    for (const auto& s : gold) by_id[s.id] = &s;
    std::vector<Sentence> targets;
    targets.reserve(split.targets.size());
    for (std::size_t i = 0; i < split.targets.size(); ++i) {
      auto it = by_id.find(split.targets[i]);
      if (it == by_id.end())
        throw EvaluationError("split references unknown gold sentence id " +
                              std::to_string(split.targets[i]));
      Sentence s = *it->second;
      s.id = static_cast<int>(i);  // exported targets are renumbered from 0
      targets.push_back(std::move(s));
    }
    gold = std::move(targets);
  }

  const MetricsReport report = span_prf(pred, gold);

  std::map<std::string, std::string> meta;
  for (const auto& kv : args.meta) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--meta expects key=value, got '" + kv + "'");
    meta[kv.substr(0, eq)] = kv.substr(eq + 1);
  }

  const fs::path out = fs::path(args.out_dir) / "metrics.json";
  write_file_atomic(out, metrics_to_json(report, meta));
  manifest.add_output(out);
  manifest.set_config(meta);
  manifest.write(fs::path(args.out_dir) / "manifest.json");
  std::cout << metrics_to_table(report);
  return 0;
}

// ----------------------------------------------------------------- stats --

struct StatsArgs {
  std::string scores;
  double alpha = 0.01;
  std::string adjust = "holm";
  std::string out_dir = ".";
};

int cmd_stats(const StatsArgs& args) {
  if (args.scores.empty()) throw ConfigError("stats needs --scores");
  RunManifest manifest("stats");
  manifest.add_input(args.scores);

  const ScoreMatrix matrix = load_score_csv(args.scores);
  const RankMatrix ranks = rank_scores(matrix);
  const FriedmanResult fr = friedman(ranks);
  const ConoverResult conover =
      conover_posthoc(ranks, args.alpha, p_adjust_from_name(args.adjust));

  const fs::path out_dir(args.out_dir);
  write_file_atomic(out_dir / "friedman.json",
                    friedman_to_json(fr, matrix.methods));
  write_file_atomic(out_dir / "conover.csv",
                    conover_to_csv(conover, matrix.methods));
  write_file_atomic(out_dir / "cd.csv",
                    cd_report_csv(conover, ranks, matrix.methods));
  write_file_atomic(out_dir / "cd.json",
                    cd_report_json(conover, ranks, matrix.methods));
  for (const char* name : {"friedman.json", "conover.csv", "cd.csv", "cd.json"})
    manifest.add_output(out_dir / name);
  manifest.set_config({{"alpha", std::to_string(args.alpha)},
                       {"adjust", args.adjust}});
  manifest.write(out_dir / "manifest.json");

  std::cout << "chi2=" << fr.chi2 << " df=" << fr.df << " p=" << fr.p_value
            << " groups=" << conover.groups.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------- report --

struct ReportArgs {
  std::string runs_dir;
  std::string out_dir = ".";
};

struct RunEntry {
  std::map<std::string, std::string> meta;
  MetricsReport metrics;
};

int cmd_report(const ReportArgs& args) {
  if (args.runs_dir.empty()) throw ConfigError("report needs --runs");
  RunManifest manifest("report");

  std::vector<RunEntry> entries;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(args.runs_dir))
    if (entry.is_regular_file() && entry.path().filename() == "metrics.json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    json j;
    try {
      j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    RunEntry run;
    if (j.contains("meta"))
      for (const auto& [k, v] : j["meta"].items())
        run.meta[k] = v.get<std::string>();
    run.metrics.micro.tp = j.at("counts").at("tp").get<long long>();
    run.metrics.micro.fp = j.at("counts").at("fp").get<long long>();
    run.metrics.micro.fn = j.at("counts").at("fn").get<long long>();
    entries.push_back(std::move(run));
    manifest.add_input(path);
  }
  if (entries.empty())
    throw ConfigError("no metrics.json files under " + args.runs_dir);

  // group runs by (dataset, method, context, model); seeds aggregate
  auto group_key = [](const RunEntry& e) {
    auto get = [&](const char* k) {
      auto it = e.meta.find(k);
      return it == e.meta.end() ? std::string("-") : it->second;
    };
    return std::tuple(get("dataset"), get("method"), get("context_size"),
                      get("model"));
  };
  std::map<std::tuple<std::string, std::string, std::string, std::string>,
           std::vector<MetricsReport>>
      groups;
  for (const auto& e : entries) groups[group_key(e)].push_back(e.metrics);

  // Table-1-style text: per dataset, one row per method config
  std::ostringstream table;
  json aggregate_list = json::array();
  std::string current_dataset;
  char line[256];
  for (const auto& [key, reports] : groups) {
    const auto& [dataset, method, context, model] = key;
    if (dataset != current_dataset) {
      table << "== " << dataset << " ==\n";
      std::snprintf(line, sizeof(line), "%-6s %-10s %-24s %-16s %-16s %-16s\n",
                    "#Ex.", "Method", "Model", "P", "R", "F1");
      table << line;
      current_dataset = dataset;
    }
    const RunAggregate agg = aggregate_runs(reports);
    auto cell = [](const MeanStd& ms) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%.2f±%.2f", ms.mean, ms.std);
      return std::string(buf);
    };
    std::snprintf(line, sizeof(line), "%-6s %-10s %-24s %-16s %-16s %-16s\n",
                  context.c_str(), method.c_str(), model.c_str(),
                  cell(agg.precision).c_str(), cell(agg.recall).c_str(),
                  cell(agg.f1).c_str());
    table << line;

    json item;
    item["dataset"] = dataset;
    item["method"] = method;
    item["context_size"] = context;
    item["model"] = model;
    item["runs"] = agg.run_count;
    item["precision"] = {{"mean", agg.precision.mean}, {"std", agg.precision.std}};
    item["recall"] = {{"mean", agg.recall.mean}, {"std", agg.recall.std}};
    item["f1"] = {{"mean", agg.f1.mean}, {"std", agg.f1.std}};
    aggregate_list.push_back(std::move(item));
  }

  // Fig-2-style heatmap data: one CSV per dataset, rows = method config,
  // columns = models, cells = mean F1
  std::map<std::string, std::map<std::string, std::map<std::string, double>>>
      heat;  // dataset -> row label -> model -> f1
  std::set<std::string> models;
  for (const auto& [key, reports] : groups) {
    const auto& [dataset, method, context, model] = key;
    const RunAggregate agg = aggregate_runs(reports);
    const std::string row =
        context == "-" ? method : method + "-" + context;
    heat[dataset][row][model] = agg.f1.mean;
    models.insert(model);
  }

  const fs::path out_dir(args.out_dir);
  write_file_atomic(out_dir / "table.txt", table.str());
  manifest.add_output(out_dir / "table.txt");
  json agg_json;
  agg_json["groups"] = aggregate_list;
  write_file_atomic(out_dir / "aggregate.json", agg_json.dump(2) + "\n");
  manifest.add_output(out_dir / "aggregate.json");

  for (const auto& [dataset, rows] : heat) {
    std::ostringstream csv;
    csv << "method";
    for (const auto& m : models) csv << ',' << m;
    csv << '\n';
    for (const auto& [row, cells] : rows) {
      csv << row;
      for (const auto& m : models) {
        auto it = cells.find(m);
        if (it == cells.end())
          csv << ',';
        else {
          char buf[48];
          std::snprintf(buf, sizeof(buf), "%.2f", it->second);
          csv << ',' << buf;
        }
      }
      csv << '\n';
    }
    const fs::path p = out_dir / ("heatmap_" + dataset + ".csv");
    write_file_atomic(p, csv.str());
    manifest.add_output(p);
  }

  manifest.set_config({{"runs", args.runs_dir}});
  manifest.write(out_dir / "manifest.json");
  std::cout << table.str();
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"LLM-assisted NER annotation pipeline"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand(
      "ingest", "Parse and validate token-per-line corpora, report statistics");
  ingest->add_option("--train", ingest_args.train, "train split file");
  ingest->add_option("--valid", ingest_args.valid, "validation split file");
  ingest->add_option("--test", ingest_args.test, "test split file");
  ingest->add_option("--tag-col", ingest_args.tag_col,
                     "0-based tag column (CoNLL-2003 release: 3)");
  ingest->add_flag("--iob1", ingest_args.iob1, "convert IOB1 input to BIO");
  ingest->add_option("--name", ingest_args.name, "dataset name");
  ingest->add_option("--out-dir", ingest_args.out_dir, "output directory");
  ingest->add_flag("--export", ingest_args.do_export,
                   "write normalized splits next to stats.json");

  SplitArgs split_args;
  auto* split = app.add_subcommand(
      "split", "Partition the train split into sample space and targets");
  split->add_option("--train", split_args.train, "train split file");
  split->add_option("--tag-col", split_args.tag_col, "0-based tag column");
  split->add_flag("--iob1", split_args.iob1, "convert IOB1 input to BIO");
  split->add_option("--train-size", split_args.train_size,
                    "sentence count (skips reading --train)");
  split->add_option("--fraction", split_args.fraction,
                    "sample-space share of the train split");
  split->add_option("--seed", split_args.seed, "RNG seed");
  split->add_option("--out-dir", split_args.out_dir, "output directory");

  EmbedArgs embed_args;
  auto* embed = app.add_subcommand("embed",
                                   "Embed corpus sentences into the cache");
  embed->add_option("--provider", embed_args.provider, "local-test|remote");
  embed->add_option("--model", embed_args.model, "embedding model id");
  embed->add_option("--endpoint", embed_args.endpoint, "remote endpoint");
  embed->add_option("--api-key-env", embed_args.api_key_env,
                    "environment variable holding the API key");
  embed->add_option("--dim", embed_args.dim, "embedding dimension");
  embed->add_option("--batch-size", embed_args.batch_size, "texts per request");
  embed->add_option("--cache", embed_args.cache, "embedding cache file");
  embed->add_option("--corpus", embed_args.corpus_file,
                    "token-per-line corpus to embed");
  embed->add_option("--tag-col", embed_args.tag_col, "0-based tag column");
  embed->add_flag("--iob1", embed_args.iob1, "convert IOB1 input to BIO");
  embed->add_option("--texts", embed_args.texts_file, "one text per line");
  embed->add_option("--index-out", embed_args.index_out,
                    "also build and save a vector index");
  embed->add_option("--out-dir", embed_args.out_dir, "manifest directory");

  AnnotateArgs annotate_args;
  auto* annotate = app.add_subcommand(
      "annotate", "Annotate the target sentences with an LLM");
  annotate->add_option("--config", annotate_args.config_file,
                       "key = value run config file");
  annotate->add_option("--train", annotate_args.train, "train split file");
  annotate->add_option("--name", annotate_args.name, "dataset name");
  annotate->add_option("--labels", annotate_args.labels,
                       "comma-separated label order override");
  annotate->add_option("--tag-col", annotate_args.tag_col, "0-based tag column");
  annotate->add_option("--iob1", annotate_args.iob1,
                       "1 to convert IOB1 input to BIO");
  annotate->add_option("--mode", annotate_args.mode, "baseline|icl|rag");
  annotate->add_option("--m", annotate_args.m, "context examples per prompt");
  annotate->add_option("--fraction", annotate_args.fraction,
                       "sample-space share of the train split");
  annotate->add_option("--seed", annotate_args.seed, "RNG / completion seed");
  annotate->add_option("--provider", annotate_args.provider,
                       "mock:echo-gold|mock:empty|mock:malformed|replay:<path>|http");
  annotate->add_option("--replay", annotate_args.replay,
                       "transcript to replay (same as --provider replay:<path>)");
  annotate->add_option("--endpoint", annotate_args.endpoint, "chat endpoint");
  annotate->add_option("--model", annotate_args.model, "chat model id");
  annotate->add_option("--temperature", annotate_args.temperature,
                       "completion temperature");
  annotate->add_option("--max-output-tokens", annotate_args.max_output_tokens,
                       "completion output budget");
  annotate->add_option("--structured-output", annotate_args.structured,
                       "1 to request the entity-list schema");
  annotate->add_option("--embed-provider", annotate_args.embed_provider,
                       "local-test|remote");
  annotate->add_option("--embed-model", annotate_args.embed_model,
                       "embedding model id");
  annotate->add_option("--embed-endpoint", annotate_args.embed_endpoint,
                       "embedding endpoint");
  annotate->add_option("--embed-dim", annotate_args.embed_dim,
                       "embedding dimension");
  annotate->add_option("--embed-batch-size", annotate_args.embed_batch,
                       "texts per embedding request");
  annotate->add_option("--cache", annotate_args.cache, "embedding cache file");
  annotate->add_option("--split", annotate_args.split_file,
                       "resume from a persisted split.json");
  annotate->add_option("--icl-resample-per-target", annotate_args.icl_resample,
                       "1 to redraw the ICL context per sentence");
  annotate->add_option("--failure-threshold", annotate_args.failure_threshold,
                       "max tolerated provider-error rate");
  annotate->add_option("--max-inflight", annotate_args.max_inflight,
                       "concurrent provider requests");
  annotate->add_option("--out-dir", annotate_args.out_dir, "output directory");

  EvaluateArgs evaluate_args;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Span-level P/R/F1 of annotations against gold");
  evaluate->add_option("--pred", evaluate_args.pred, "annotated file (T-hat)");
  evaluate->add_option("--gold", evaluate_args.gold, "gold file");
  evaluate->add_option("--tag-col", evaluate_args.tag_col,
                       "0-based tag column of the gold file");
  evaluate->add_option("--split", evaluate_args.split_file,
                       "split.json for selecting targets out of --gold");
  evaluate->add_option("--meta", evaluate_args.meta,
                       "key=value metadata stored with the metrics")
      ->take_all();
  evaluate->add_option("--out-dir", evaluate_args.out_dir, "output directory");

  StatsArgs stats_args;
  auto* stats = app.add_subcommand(
      "stats", "Friedman + Conover post-hoc over a score matrix CSV");
  stats->add_option("--scores", stats_args.scores,
                    "CSV: header = method names, first column = conditions");
  stats->add_option("--alpha", stats_args.alpha, "significance level");
  stats->add_option("--adjust", stats_args.adjust, "none|bonferroni|holm");
  stats->add_option("--out-dir", stats_args.out_dir, "output directory");

  ReportArgs report_args;
  auto* report = app.add_subcommand(
      "report", "Merge evaluated runs into result tables and heatmap data");
  report->add_option("--runs", report_args.runs_dir,
                     "directory scanned recursively for metrics.json");
  report->add_option("--out-dir", report_args.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(ingest_args);
    if (split->parsed()) return cmd_split(split_args);
    if (embed->parsed()) return cmd_embed(embed_args);
    if (annotate->parsed()) return cmd_annotate(annotate_args);
    if (evaluate->parsed()) return cmd_evaluate(evaluate_args);
    if (stats->parsed()) return cmd_stats(stats_args);
    if (report->parsed()) return cmd_report(report_args);
  } catch (const ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace annotator
