#include "cli.hpp"

#include <algorithm>
#include <cstdlib>

#include "CLI11.hpp"
#include "landlab/errors.hpp"
#include "landlab/experiment.hpp"
#include "landlab/reports.hpp"
#include "landlab/trace_io.hpp"

namespace landlab::cli {

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kIoError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

ExperimentConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig c = load_experiment_config(o.config);
  if (o.seed) c.seed = *o.seed;
  return c;
}

RunOptions run_options(const Options& o, std::ostream& log, bool walks, bool evolution) {
  RunOptions r;
  r.out = resolve_out(o.out);
  r.jobs = o.jobs;
  r.walks = walks;
  r.evolution = evolution;
  if (!o.quiet) r.log = [&log](const std::string& line) { log << line << std::endl; };
  return r;
}

int run_protocol(const Options& o, std::ostream& log, bool walks, bool evolution) {
  const ExperimentConfig c = load(o);
  const RunOptions r = run_options(o, log, walks, evolution);
  const auto results = run_experiment(c, r);
  for (const auto& res : results) {
    std::size_t evals = 0;
    for (const auto& w : res.walks) evals += w.evaluations;
    for (const auto& e : res.runs) evals += e.evaluations;
    log << res.dir.string() << ": " << res.walks.size() << " walks, " << res.runs.size()
        << " runs, " << evals << " evaluations\n";
  }
  return kOk;
}

// Rows follow the dataset order of the config; unknown datasets go last.
void order_by_config(std::vector<ConfigurationMeasures>& measures, const ExperimentConfig& c) {
  auto rank = [&](const ConfigurationMeasures& m) {
    for (std::size_t i = 0; i < c.datasets.size(); ++i) {
      if (c.datasets[i].name == m.dataset) return i;
    }
    return c.datasets.size();
  };
  std::stable_sort(measures.begin(), measures.end(),
                   [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
}

int measure_into(const std::filesystem::path& root, const ExperimentConfig* config,
                 const MeasureSettings& settings, std::ostream& log) {
  auto measures = measure_tree(root, settings);
  if (config) order_by_config(measures, *config);
  const auto files = write_reports(measures, root);
  for (const auto& m : measures) {
    log << m.label() << ": " << m.walk_count << " walks, R_f = " << format_real(m.entropy_train.r_f)
        << "\n";
  }
  log << files.size() << " report files written under " << root.string() << "\n";
  return kOk;
}

}  // namespace

std::filesystem::path resolve_out(const std::filesystem::path& flag) {
  if (const char* env = std::getenv("LANDSCAPE_LAB_OUT"); env && *env) return env;
  return flag;
}

int cmd_walk(const Options& o, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] { return run_protocol(o, log, true, false); });
}

int cmd_evolve(const Options& o, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] { return run_protocol(o, log, false, true); });
}

int cmd_measure(const Options& o, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    std::optional<ExperimentConfig> c;
    if (!o.config.empty()) c = load(o);
    const auto root = o.trace_dir.empty() ? resolve_out(o.out) : o.trace_dir;
    return measure_into(root, c ? &*c : nullptr, c ? c->measures : MeasureSettings{}, log);
  });
}

int cmd_reproduce(const Options& o, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = load(o);
    const RunOptions r = run_options(o, log, true, true);
    run_experiment(c, r);
    if (c.walks == 0) {
      log << "no walks configured; skipping measures\n";
      return kOk;
    }
    return measure_into(r.out, &c, c.measures, log);
  });
}

int run(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Fitness landscape analysis of grammar-encoded CNN architectures"};
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("-c,--config", o.config, "JSON experiment configuration");
    if (config_required) opt->required();
    sub->add_option("-o,--out", o.out, "output directory (LANDSCAPE_LAB_OUT overrides)");
    sub->add_option("-j,--jobs", o.jobs, "parallel runs")->check(CLI::PositiveNumber);
    sub->add_option("-s,--seed", o.seed, "master seed, overriding the config");
    sub->add_flag("-q,--quiet", o.quiet, "no per-run progress lines");
  };
  auto* walk = app.add_subcommand("walk", "selective walks for every configuration");
  add_common(walk, true);
  auto* evolve = app.add_subcommand("evolve", "evolution runs for every configuration");
  add_common(evolve, true);
  auto* measure = app.add_subcommand("measure", "autocorrelation and entropy reports from walk traces");
  add_common(measure, false);
  measure->add_option("trace_dir", o.trace_dir, "directory holding walk traces (default: --out)");
  auto* reproduce = app.add_subcommand("reproduce", "walks, evolution and measures in one go");
  add_common(reproduce, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, log, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, log, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, log, err);
    return kBadConfig;
  }

  if (walk->parsed()) return cmd_walk(o, log, err);
  if (evolve->parsed()) return cmd_evolve(o, log, err);
  if (measure->parsed()) return cmd_measure(o, log, err);
  return cmd_reproduce(o, log, err);
}

}  // namespace landlab::cli
