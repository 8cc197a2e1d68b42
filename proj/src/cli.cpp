#include "heterotest/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <csignal>
#include <iostream>

#include "heterotest/ci.hpp"
#include "heterotest/coverage.hpp"
#include "heterotest/report.hpp"
#include "heterotest/rungen.hpp"
#include "heterotest/slrunner.hpp"
#include "heterotest/util.hpp"

namespace heterotest::cli {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct Globals {
  bool verbose = false;
  std::string out;
};

void print_counts(std::ostream& out, const StatusCounts& c) {
  out << c.total() << " tests: " << c.passed << " passed, " << c.failed << " failed, " << c.error << " errors\n";
}

void print_cases(std::ostream& err, const report::ResultsDocument& doc) {
  for (const auto& s : doc.suites) {
    for (const auto& tc : s.cases) {
      err << to_string(tc.status) << "  " << s.suite << "::" << tc.name << "\n";
      if (tc.status != TestStatus::passed) {
        for (const auto& m : tc.messages) err << "    " << m.text << "\n";
      }
    }
  }
}

int run_manifest_command(const std::string& manifest_path, const Globals& g, bool cover, int verbosity,
                         const std::string& report_name, const std::vector<std::string>& search, bool listings,
                         std::ostream& out, std::ostream& err) {
  auto manifest = rungen::read_manifest(manifest_path);
  for (const auto& d : manifest.diagnostics) err << "manifest: " << d << "\n";

  rungen::RunOptions options;
  options.base_dir = fs::absolute(manifest_path).parent_path();
  for (const auto& s : search) options.model_search_path.emplace_back(s);
  coverage::CoverageSession session;
  if (cover) options.coverage = &session;
  auto doc = rungen::run_manifest(manifest, options);
  if (cover) {
    for (const auto& d : session.diagnostics()) err << "coverage: " << d << "\n";
  }

  const fs::path out_dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  report::write_results_xml(doc, out_dir / report::results_file_name(report_name));
  report::RenderOptions render;
  render.verbosity = verbosity;
  render.report_name = report_name;
  render.source_root = options.base_dir;
  report::render_html(doc, render, out_dir);
  if (listings && doc.coverage) coverage::write_listings(*doc.coverage, report_name, options.base_dir, out_dir);

  if (g.verbose) print_cases(err, doc);
  auto counts = doc.counts();
  print_counts(out, counts);
  if (doc.coverage) {
    out << "statement coverage: " << format_percent(doc.coverage->percent()) << "% (" << doc.coverage->executed()
        << "/" << doc.coverage->instrumentable() << ")\n";
  }
  return exit_code_for(counts);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"heterotest: heterogeneous test orchestration", "heterotest"};
  app.require_subcommand(1, 1);
  Globals g;
  app.add_flag("--verbose", g.verbose, "Report every test case on the error stream");
  app.add_option("--out", g.out, "Output directory");

  // gen
  auto* gen = app.add_subcommand("gen", "Scan DSL sources into a runner manifest");
  std::vector<std::string> gen_src;
  std::string gen_manifest;
  gen->add_option("--src", gen_src, "Source directory or file")->required();
  gen->add_option("-o", gen_manifest, "Manifest to write")->required();

  // adapt
  auto* adapt = app.add_subcommand("adapt", "Generate DSL adapters for model suites");
  std::string adapt_models, adapt_out;
  adapt->add_option("--models", adapt_models, "Model directory")->required();
  adapt->add_option("-o", adapt_out, "Adapter output directory")->required();

  // run / cover
  std::string run_manifest, run_report = "heterotest";
  std::vector<std::string> run_search;
  bool run_cover = false;
  int run_verbosity = 1;
  auto* run = app.add_subcommand("run", "Execute a runner manifest and write the report");
  run->add_option("--manifest", run_manifest, "Runner manifest")->required();
  run->add_flag("--cover", run_cover, "Measure statement coverage");
  run->add_option("--verbosity", run_verbosity, "Report detail 0-2")->check(CLI::Range(0, 2));
  run->add_option("--report-name", run_report, "Report file prefix");
  run->add_option("--search", run_search, "Model search path entry");

  auto* cover = app.add_subcommand("cover", "Execute a runner manifest with coverage and write listings");
  cover->add_option("--manifest", run_manifest, "Runner manifest")->required();
  cover->add_option("--verbosity", run_verbosity, "Report detail 0-2")->check(CLI::Range(0, 2));
  cover->add_option("--report-name", run_report, "Report file prefix");
  cover->add_option("--search", run_search, "Model search path entry");

  // slrun
  auto* slrun = app.add_subcommand("slrun", "Run model suites");
  slrunner::RunnerConfig sl;
  std::string sl_suites;
  std::vector<std::string> sl_search;
  sl.report_name = "heterotest";
  slrun->add_option("--testpath", sl.testpath, "Directory holding <suite>.bdm files")->required();
  slrun->add_option("--suites", sl_suites, "Comma-separated suite names")->required();
  slrun->add_option("--report-name", sl.report_name, "Report file prefix");
  slrun->add_option("--verbosity", sl.verbosity, "Report detail 0-2")->check(CLI::Range(0, 2));
  slrun->add_option("--jobs", sl.jobs, "Suites run concurrently")->check(CLI::PositiveNumber);
  slrun->add_option("--search", sl_search, "Model search path entry");

  // report
  auto* rep = app.add_subcommand("report", "Render a results document as HTML");
  std::string rep_in, rep_name = "heterotest", rep_root;
  int rep_verbosity = 1;
  rep->add_option("--in", rep_in, "Results XML")->required();
  rep->add_option("--verbosity", rep_verbosity, "Report detail 0-2")->check(CLI::Range(0, 2));
  rep->add_option("--report-name", rep_name, "Report file prefix");
  rep->add_option("--source-root", rep_root, "Base for relative source paths");

  // ci / history
  auto* ci_cmd = app.add_subcommand("ci", "Continuous-integration daemon");
  std::string ci_config;
  bool ci_once = false;
  ci_cmd->add_option("--config", ci_config, "CI configuration file")->required();
  ci_cmd->add_flag("--once", ci_once, "Recover, poll once, run, exit");

  auto* hist = app.add_subcommand("history", "List virtual revisions and write the store index");
  std::string hist_config, hist_store;
  auto* hc = hist->add_option("--config", hist_config, "CI configuration file");
  hist->add_option("--store", hist_store, "Store directory")->excludes(hc);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPassed;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPassed;
  } catch (const CLI::ParseError& e) {
    err << "heterotest: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (gen->parsed()) {
      std::vector<fs::path> paths(gen_src.begin(), gen_src.end());
      auto manifest = rungen::scan(paths);
      rungen::generate_runner(manifest, gen_manifest);
      for (const auto& d : manifest.diagnostics) err << "gen: " << d << "\n";
      out << manifest.entries.size() << " tests listed in " << gen_manifest << "\n";
      return manifest.diagnostics.empty() ? kPassed : kError;
    }
    if (adapt->parsed()) {
      auto result = rungen::generate_adapters(adapt_models, adapt_out);
      for (const auto& d : result.diagnostics) err << "adapt: " << d << "\n";
      out << result.adapters.size() << " adapters in " << result.files.size() << " files\n";
      return result.diagnostics.empty() ? kPassed : kError;
    }
    if (run->parsed()) {
      return run_manifest_command(run_manifest, g, run_cover, run_verbosity, run_report, run_search, false, out, err);
    }
    if (cover->parsed()) {
      return run_manifest_command(run_manifest, g, true, run_verbosity, run_report, run_search, true, out, err);
    }
    if (slrun->parsed()) {
      for (const auto& s : split(sl_suites, ',')) {
        auto name = trim(s);
        if (!name.empty()) sl.testsuites.push_back(name);
      }
      if (sl.testsuites.empty()) {
        err << "heterotest: --suites lists no suite\n";
        return kUsage;
      }
      for (const auto& s : sl_search) sl.search_path.emplace_back(s);
      sl.out_dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
      auto summary = slrunner::slunit_testrunner(sl);
      if (g.verbose) print_cases(err, summary.document);
      print_counts(out, summary.counts);
      return summary.exit_code();
    }
    if (rep->parsed()) {
      std::vector<std::string> warnings;
      report::ResultsDocument doc;
      try {
        doc = report::read_results_xml(rep_in, &warnings);
      } catch (const report::SchemaError& e) {
        err << "report: " << e.what() << "\n";
        return kError;
      }
      for (const auto& w : warnings) err << "report: " << w << "\n";
      report::RenderOptions options;
      options.verbosity = rep_verbosity;
      options.report_name = rep_name;
      options.source_root = rep_root.empty() ? fs::absolute(rep_in).parent_path() : fs::path(rep_root);
      auto files = report::render_html(doc, options, g.out.empty() ? fs::path(".") : fs::path(g.out));
      out << files.size() << " files written\n";
      return kPassed;
    }
    if (ci_cmd->parsed()) {
      auto config = ci::load_config(ci_config);
      ci::Daemon daemon(config);
      if (ci_once) {
        auto recovered = daemon.recover();
        auto outcome = daemon.poll_once();
        if (!outcome.error.empty()) {
          err << "ci: " << outcome.error << "\n";
          return kError;
        }
        for (const auto& r : recovered) out << "recovered vid " << r.vid << "\n";
        if (!outcome.created) {
          out << "no change\n";
          return kPassed;
        }
        const auto& r = *outcome.run;
        out << "vid " << r.vid << ":";
        for (const auto& a : r.actions) out << " " << a.id << "=" << ci::to_string(a.status);
        out << "\n";
        for (const auto& a : r.actions) {
          if (a.status == ci::ActionStatus::failed) err << "ci: " << a.id << ": " << a.log << "\n";
        }
        bool infra = std::any_of(r.actions.begin(), r.actions.end(),
                                 [](const ci::ActionRecord& a) { return a.status == ci::ActionStatus::failed; });
        return infra ? kError : exit_code_for(r.counts);
      }
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      daemon.run(g_stop);
      return kPassed;
    }
    if (hist->parsed()) {
      fs::path store_dir;
      if (!hist_store.empty()) {
        store_dir = hist_store;
      } else if (!hist_config.empty()) {
        store_dir = ci::load_config(hist_config).store;
      } else {
        err << "heterotest: history needs --config or --store\n";
        return kUsage;
      }
      ci::Store store(store_dir);
      for (const auto& row : ci::history(store)) {
        out << row.revision.vid << "\t";
        std::string revs;
        for (const auto& [name, rev] : row.revision.revisions) revs += (revs.empty() ? "" : ",") + name + "=" + rev;
        out << revs << "\t";
        if (row.running) {
          out << "running\n";
        } else {
          const auto& c = row.run->counts;
          out << c.passed << "/" << c.failed << "/" << c.error << "\n";
        }
      }
      return kPassed;
    }
  } catch (const ci::ConfigError& e) {
    err << "heterotest: " << e.what() << "\n";
    return kUsage;
  } catch (const ci::StoreCorruption& e) {
    err << "heterotest: " << e.what() << "\n";
    return kError;
  } catch (const rungen::ManifestError& e) {
    err << "heterotest: " << e.what() << "\n";
    return kError;
  } catch (const rungen::AdapterCollision& e) {
    err << "heterotest: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    err << "heterotest: internal error: " << e.what() << "\n";
    return kInternal;
  }
  err << app.help();
  return kUsage;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return dispatch(args, std::cout, std::cerr);
  } catch (...) {
    return kInternal;
  }
}

}  // namespace heterotest::cli
