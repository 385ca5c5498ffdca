#include "screening/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "screening/experiment.hpp"
#include "screening/pubmed.hpp"

namespace screening {

namespace {

namespace fs = std::filesystem;

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

Json read_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(std::string("cannot read ") + what + " " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw EvaluationError(std::string("malformed ") + what + " " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string metrics_line(const EvalReport& r) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << r.name << ": P=" << r.metrics.precision << " R=" << r.metrics.recall
    << " F=" << r.metrics.f_measure;
  return s.str();
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::size_t jobs = 1;
};

int cmd_run(const RunArgs& args, std::ostream& out) {
  PlanOverrides overrides;
  overrides.seed = args.seed;
  if (args.out) overrides.output_dir = *args.out;
  const auto plan = load_experiment_plan(args.config, overrides);
  const auto stamp = utc_timestamp();
  std::vector<EvalReport> reports;
  for (const auto& e : plan.experiments) {
    auto report = [&] {
      try {
        return run_experiment(e, args.jobs);
      } catch (const Error& err) {
        rethrow_with_context(err, "experiment " + e.name);
      }
    }();
    const auto dir = plan.grid ? plan.output_dir / e.name : plan.output_dir;
    write_report_files(report, dir, stamp);
    out << metrics_line(report) << "  -> " << (dir / ("report_" + report.name + ".json")).string() << '\n';
    reports.push_back(std::move(report));
  }
  if (plan.grid) {
    write_text(plan.output_dir / "comparison.txt", render_comparison_table(reports));
    Json j = Json::array();
    for (const auto& r : reports) {
      Json row;
      row["name"] = r.name;
      row["architecture"] = std::string(architecture_name(r.kind));
      row["configuration"] = r.configuration;
      row["precision"] = r.metrics.precision;
      row["recall"] = r.metrics.recall;
      row["f_measure"] = r.metrics.f_measure;
      j.push_back(std::move(row));
    }
    write_text(plan.output_dir / "comparison.json", j.dump(2) + "\n");
    out << '\n' << render_comparison_table(reports);
  }
  return 0;
}

struct CompareArgs {
  std::vector<std::string> reports;
  std::optional<std::string> baselines;
  std::optional<std::string> out;
};

int cmd_compare(const CompareArgs& args, std::ostream& out) {
  std::vector<EvalReport> reports;
  for (const auto& path : args.reports) {
    const auto j = read_json_file(path, "report");
    try {
      reports.push_back(report_from_json(j));
    } catch (const Error& e) {
      rethrow_with_context(e, path);
    }
  }
  std::vector<Baseline> baselines;
  if (args.baselines) baselines = baselines_from_json(read_json_file(*args.baselines, "baselines"));
  const auto rows = compare_reports(reports, baselines);
  const auto text = render_comparison_rows(rows, baselines);
  out << text;
  if (args.out) {
    write_text(fs::path(*args.out) / "comparison.txt", text);
    write_text(fs::path(*args.out) / "comparison.json", comparison_to_json(rows, baselines).dump(2) + "\n");
  }
  return 0;
}

struct FetchArgs {
  std::string ids;
  std::string out;
  std::optional<std::string> fixtures;
  std::optional<std::string> sidecar;
  std::optional<std::string> failures;
  std::optional<std::string> api_key;
};

int cmd_fetch(const FetchArgs& args, std::ostream& out, std::ostream& err) {
  const auto ids = read_id_list(args.ids);
  FetchMode mode = LiveMode{};
  if (args.fixtures) {
    mode = FixtureMode{*args.fixtures};
  } else if (args.api_key) {
    auto& live = std::get<LiveMode>(mode);
    live.api_key = *args.api_key;
    live.requests_per_second = 10.0;
  }
  PubmedClient client(mode);
  auto fetched = client.fetch(ids);
  std::optional<std::map<std::string, CriterionRatings>> sidecar;
  if (args.sidecar) sidecar = load_ratings_sidecar(*args.sidecar, StopRule::clinical_hedges());
  std::vector<std::string> failed_ids;
  for (const auto& f : fetched.failures) failed_ids.push_back(f.id);
  auto converted = records_to_articles(fetched.records, sidecar, failed_ids);

  std::ostringstream lines;
  for (const auto& a : converted.articles) lines << format_article_line(a) << '\n';
  write_text(args.out, lines.str());

  auto failures = fetched.failures;
  failures.insert(failures.end(), converted.rejected.begin(), converted.rejected.end());
  const fs::path failures_path = args.failures ? fs::path(*args.failures) : fs::path(args.out + ".failures.jsonl");
  std::ostringstream failure_lines;
  for (const auto& f : failures) {
    Json j;
    j["id"] = f.id;
    j["reason"] = f.reason;
    failure_lines << j.dump() << '\n';
    err << "failed " << f.id << ": " << one_line(f.reason) << '\n';
  }
  write_text(failures_path, failure_lines.str());
  out << "fetched " << converted.articles.size() << " articles, " << failures.size() << " failures -> " << args.out
      << '\n';
  return 0;
}

struct SynthArgs {
  std::size_t n = 33000;
  double ratio = 32.0;
  std::string signal = "1";
  std::uint64_t seed = 7;
  double pt_tag_rate = 0.05;
  std::string out;
};

std::array<double, 4> parse_signal(const std::string& text) {
  std::array<double, 4> s{};
  std::vector<double> values;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError("--signal: \"" + part + "\" is not a number");
    }
  }
  if (values.size() == 1) s.fill(values[0]);
  else if (values.size() == 4) std::copy(values.begin(), values.end(), s.begin());
  else throw ConfigError("--signal: expected one value or four comma-separated values");
  for (double v : s)
    if (v < 0.0 || v > 1.0) throw ConfigError("--signal: values must be in [0, 1]");
  return s;
}

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  SyntheticConfig cfg;
  cfg.size = args.n;
  cfg.negatives_per_positive = args.ratio;
  cfg.signal_strength = parse_signal(args.signal);
  cfg.seed = args.seed;
  cfg.pt_tag_rate = args.pt_tag_rate;
  const auto corpus = generate_synthetic(cfg);
  save_corpus(args.out, corpus);
  const auto labels = derive_labels(corpus, cfg.positive);
  out << "wrote " << corpus.size() << " articles (" << std::count(labels.begin(), labels.end(), true)
      << " positive) -> " << args.out << '\n';
  return 0;
}

struct StatsArgs {
  std::string corpus;
  bool pt_tag = false;
  std::vector<double> percentiles{69.0, 92.0, 95.0};
  bool json = false;
};

int cmd_stats(const StatsArgs& args, std::ostream& out) {
  const auto corpus = load_corpus(args.corpus, StopRule::clinical_hedges());
  const auto spec = PositiveClassSpec::scientifically_sound_treatment();
  FeaturizerConfig fc;
  fc.use_pt_tag = args.pt_tag;
  const auto stats = corpus_length_stats(corpus, fc, args.percentiles);
  auto counts = [&](const Corpus& c) {
    const auto labels = derive_labels(c, spec);
    const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
    return std::array<std::size_t, 3>{pos, c.size() - pos, c.size()};
  };
  const auto full = counts(corpus);
  const auto subset = counts(filter_subset(corpus, SubsetConstraint::del_fiol()));
  if (args.json) {
    Json j;
    j["full"] = {{"positive", full[0]}, {"negative", full[1]}, {"total", full[2]}};
    j["del_fiol"] = {{"positive", subset[0]}, {"negative", subset[1]}, {"total", subset[2]}};
    Json lj;
    lj["count"] = stats.count;
    lj["mean"] = stats.mean;
    lj["min"] = stats.min;
    lj["max"] = stats.max;
    Json pj = Json::object();
    for (const auto& [p, v] : stats.percentiles) {
      std::ostringstream key;
      key << p;
      pj[key.str()] = v;
    }
    lj["percentiles"] = pj;
    j["length"] = lj;
    out << j.dump(2) << '\n';
    return 0;
  }
  out << "Subset     Positive  Negative  Total\n";
  out << "full       " << std::setw(8) << full[0] << "  " << std::setw(8) << full[1] << "  " << full[2] << '\n';
  out << "del_fiol   " << std::setw(8) << subset[0] << "  " << std::setw(8) << subset[1] << "  " << subset[2] << "\n\n";
  out << "Length (words)\n";
  out << "  mean  " << std::fixed << std::setprecision(2) << stats.mean << '\n';
  out << "  min   " << stats.min << '\n';
  out << "  max   " << stats.max << '\n';
  for (const auto& [p, v] : stats.percentiles) out << "  p" << std::defaultfloat << p << "   " << v << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Screening experiments: corpora, cross-validation and comparisons", "screen"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Cross-validate the experiment(s) in a config file");
  run->add_option("--config", run_args.config, "Experiment config (JSON)")->required();
  run->add_option("--seed", run_args.seed, "Override the config seed");
  run->add_option("--out", run_args.out, "Output directory");
  run->add_option("--jobs", run_args.jobs, "Folds trained concurrently")->check(CLI::PositiveNumber);

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "Tabulate reports against published baselines");
  compare->add_option("reports", compare_args.reports, "Report JSON files")->required();
  compare->add_option("--baselines", compare_args.baselines, "Baselines JSON");
  compare->add_option("--out", compare_args.out, "Directory for comparison.txt and comparison.json");

  FetchArgs fetch_args;
  auto* fetch = app.add_subcommand("fetch", "Fetch articles by PMID");
  fetch->add_option("--ids", fetch_args.ids, "File with one PMID per line")->required();
  fetch->add_option("--out", fetch_args.out, "Output corpus (JSON lines)")->required();
  fetch->add_option("--fixtures", fetch_args.fixtures, "Directory of <PMID>.xml responses (offline)");
  fetch->add_option("--sidecar", fetch_args.sidecar, "Ratings sidecar (JSON lines)");
  fetch->add_option("--failures", fetch_args.failures, "Failure log (default <out>.failures.jsonl)");
  fetch->add_option("--api-key", fetch_args.api_key, "E-utilities API key");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic rated corpus");
  synth->add_option("--n", synth_args.n, "Number of articles")->capture_default_str();
  synth->add_option("--ratio", synth_args.ratio, "Negatives per positive")->capture_default_str();
  synth->add_option("--signal", synth_args.signal, "Signal strength: one value or format,hhc,purpose,rigor")
      ->capture_default_str();
  synth->add_option("--seed", synth_args.seed, "Generator seed")->capture_default_str();
  synth->add_option("--pt-tag-rate", synth_args.pt_tag_rate, "Chance of a publication-type tag")
      ->capture_default_str();
  synth->add_option("--out", synth_args.out, "Output corpus (JSON lines)")->required();

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "Class counts and length statistics of a corpus");
  stats->add_option("--corpus", stats_args.corpus, "Corpus (JSON lines)")->required();
  stats->add_flag("--pt-tag", stats_args.pt_tag, "Count publication-type tags as text");
  stats->add_option("--percentiles", stats_args.percentiles, "Percentiles to report")->capture_default_str();
  stats->add_flag("--json", stats_args.json, "Print JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (*run) return cmd_run(run_args, out);
    if (*compare) return cmd_compare(compare_args, out);
    if (*fetch) return cmd_fetch(fetch_args, out, err);
    if (*synth) return cmd_synth(synth_args, out);
    if (*stats) return cmd_stats(stats_args, out);
  } catch (const Error& e) {
    err << "error[" << e.category() << "]: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error[io]: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error[internal]: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 1;
}

}  // namespace screening
