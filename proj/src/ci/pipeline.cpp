#include <algorithm>
#include <chrono>
#include <ctime>
#include <functional>
#include <sstream>

#include "heterotest/blockmodel.hpp"
#include "heterotest/ci.hpp"
#include "heterotest/coverage.hpp"
#include "heterotest/report.hpp"
#include "heterotest/rungen.hpp"
#include "heterotest/slrunner.hpp"
#include "heterotest/util.hpp"

namespace heterotest::ci {

namespace {

struct Workspace {
  fs::path run_dir;
  fs::path work;
  fs::path report_dir;
  fs::path manifest;
  bool checked_out = false;
  bool built = false;
  bool tested = false;
  std::vector<fs::path> model_suites;
  std::vector<std::string> diagnostics;
  std::optional<coverage::CoverageSession> coverage;
  report::ResultsDocument doc;
};

std::string rfc5322_date() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, "%a, %d %b %Y %H:%M:%S +0000", &tm);
  return buf;
}

std::string summary_line(const StatusCounts& c) {
  return std::to_string(c.passed) + "/" + std::to_string(c.failed) + "/" + std::to_string(c.error);
}

std::string do_checkout(const VirtualRevision& vrev, const CiConfig& config, Workspace& ws) {
  fs::remove_all(ws.work);
  fs::create_directories(ws.work);
  std::ostringstream log;
  for (const auto& c : config.components) {
    auto it = vrev.revisions.find(c.name);
    if (it == vrev.revisions.end()) throw std::runtime_error("no revision recorded for component '" + c.name + "'");
    make_adapter(c.kind)->checkout(c, it->second, ws.work / c.name);
    log << c.name << "@" << it->second << " ";
  }
  ws.checked_out = true;
  return trim(log.str());
}

std::string do_build(const CiConfig& config, Workspace& ws) {
  if (!ws.checked_out) throw std::runtime_error("build requires a checkout");
  const fs::path main = ws.work / config.main_component().name;
  const fs::path adapters = ws.work / "adapters";

  auto adapted = rungen::generate_adapters(main, adapters);
  for (const auto& d : adapted.diagnostics) ws.diagnostics.push_back("build: " + d);

  for (const auto& entry : fs::recursive_directory_iterator(main)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".bdm") continue;
    try {
      if (blockmodel::load_model(entry.path()).is_suite()) ws.model_suites.push_back(entry.path());
    } catch (const std::exception&) {
      // already reported by adapter generation
    }
  }
  std::sort(ws.model_suites.begin(), ws.model_suites.end());

  auto manifest = rungen::scan({main, adapters});
  for (const auto& d : manifest.diagnostics) ws.diagnostics.push_back("build: " + d);
  rungen::generate_runner(manifest, ws.manifest);

  std::string log = std::to_string(manifest.entries.size()) + " DSL tests, " + std::to_string(adapted.adapters.size()) +
                    " adapters, " + std::to_string(ws.model_suites.size()) + " model suites";
  if (!ws.diagnostics.empty()) {
    throw std::runtime_error(std::to_string(ws.diagnostics.size()) + " build diagnostic(s): " + ws.diagnostics.front());
  }
  ws.built = true;
  return log;
}

std::string do_test(const CiConfig& config, Workspace& ws, bool with_coverage) {
  if (!ws.built) throw std::runtime_error("test requires a successful build");
  std::vector<fs::path> search{ws.work};
  for (const auto& c : config.components) search.push_back(ws.work / c.name);

  testdsl::ModelEngine engine(search);
  rungen::RunOptions options;
  options.base_dir = ws.work;
  options.engine = &engine;
  options.model_search_path = search;
  if (with_coverage) {
    ws.coverage.emplace();
    options.coverage = &*ws.coverage;
  }
  ws.doc = rungen::run_manifest(rungen::read_manifest(ws.manifest), options);
  for (const auto& suite : ws.model_suites) {
    ws.doc.suites.push_back(slrunner::run_suite(suite, search, portable_relative(suite, ws.work)));
  }
  ws.tested = true;
  auto counts = ws.doc.counts();
  return std::to_string(counts.total()) + " tests: " + summary_line(counts);
}

std::string do_coverage(Workspace& ws) {
  if (!ws.tested || !ws.doc.coverage) throw std::runtime_error("coverage requires a test run");
  for (const auto& d : ws.coverage->diagnostics()) ws.doc.diagnostics.push_back("coverage: " + d);
  const auto& map = *ws.doc.coverage;
  return "statement coverage " + format_percent(map.percent()) + "% (" + std::to_string(map.executed()) + "/" +
         std::to_string(map.instrumentable()) + ")";
}

std::string do_report(const VirtualRevision& vrev, const CiConfig& config, Workspace& ws, PipelineRun& run,
                      const std::vector<ActionRecord>& done) {
  auto& doc = ws.doc;
  if (doc.timestamp.empty()) doc.timestamp = utc_timestamp();
  doc.revision = vrev.vid;
  if (!ws.tested) {
    for (const auto& d : ws.diagnostics) doc.diagnostics.push_back(d);
    for (const auto& a : done) {
      if (a.status == ActionStatus::failed) doc.diagnostics.push_back(a.id + " failed: " + a.log);
    }
  }
  fs::remove_all(ws.report_dir);
  report::write_results_xml(doc, ws.report_dir / report::results_file_name(kReportName));
  report::RenderOptions options;
  options.verbosity = config.verbosity;
  options.report_name = kReportName;
  options.source_root = ws.work;
  auto files = report::render_html(doc, options, ws.report_dir);
  run.results = "report/" + report::results_file_name(kReportName);
  run.report = "report/" + report::overview_file_name(kReportName);
  return std::to_string(files.size() + 1) + " files written";
}

}  // namespace

fs::path notify(const PipelineRun& run, const NotifyConfig& config, const std::string& summary,
                const fs::path& report_path) {
  fs::create_directories(config.outbox);
  std::string to;
  for (const auto& r : config.recipients) to += (to.empty() ? "" : ", ") + r;

  std::ostringstream msg;
  msg << "From: heterotest <heterotest@localhost>\r\n";
  if (!to.empty()) msg << "To: " << to << "\r\n";
  msg << "Date: " << rfc5322_date() << "\r\n";
  msg << "Subject: [heterotest] vid " << run.vid << ": " << summary_line(run.counts) << "\r\n";
  msg << "MIME-Version: 1.0\r\n";
  msg << "Content-Type: text/plain; charset=utf-8\r\n";
  msg << "\r\n";
  for (const auto& line : split_lines(summary)) msg << line << "\r\n";
  msg << "\r\n";
  msg << "Report: " << report_path.generic_string() << "\r\n";

  auto path = config.outbox / ("vid-" + std::to_string(run.vid) + ".eml");
  write_text_file(path, msg.str());
  return path;
}

PipelineRun run_pipeline(const VirtualRevision& vrev, const CiConfig& config, Store& store) {
  PipelineRun run;
  run.vid = vrev.vid;
  Workspace ws;
  ws.run_dir = store.run_dir(vrev.vid);
  ws.work = ws.run_dir / "work";
  ws.report_dir = ws.run_dir / "report";
  ws.manifest = ws.work / "runner.manifest";
  const bool with_coverage = std::find(config.actions.begin(), config.actions.end(), "coverage") != config.actions.end();

  try {
    store.mark_running(vrev.vid);
  } catch (const std::exception&) {
    // the run record is written at the end regardless
  }

  bool failed_before = false;
  for (const auto& id : config.actions) {
    ActionRecord record;
    record.id = id;
    const bool always = id == "report" || id == "notify" || id == "cleanup";
    if (failed_before && !always) {
      record.status = ActionStatus::skipped;
      record.log = "skipped after an earlier failure";
      run.actions.push_back(std::move(record));
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      if (id == "checkout") {
        record.log = do_checkout(vrev, config, ws);
      } else if (id == "build") {
        record.log = do_build(config, ws);
      } else if (id == "test") {
        record.log = do_test(config, ws, with_coverage);
      } else if (id == "coverage") {
        record.log = do_coverage(ws);
      } else if (id == "report") {
        record.log = do_report(vrev, config, ws, run, run.actions);
      } else if (id == "notify") {
        if (!config.notify.enabled) {
          record.log = "notification disabled";
        } else {
          std::ostringstream summary;
          auto c = ws.doc.counts();
          summary << "Virtual revision " << vrev.vid << "\n";
          for (const auto& [name, rev] : vrev.revisions) summary << "  " << name << " @ " << rev << "\n";
          summary << "\nTests: " << c.total() << "  passed " << c.passed << "  failed " << c.failed << "  errors "
                  << c.error << "\n";
          if (ws.doc.coverage) summary << "Statement coverage: " << format_percent(ws.doc.coverage->percent()) << "%\n";
          for (const auto& a : run.actions) summary << "  " << a.id << ": " << to_string(a.status) << "\n";
          PipelineRun snapshot = run;
          snapshot.counts = c;
          fs::path report_path = run.report ? ws.run_dir / *run.report : ws.report_dir;
          record.log = "wrote " + notify(snapshot, config.notify, summary.str(), report_path).generic_string();
        }
      } else if (id == "cleanup") {
        fs::remove_all(ws.work);
        record.log = "workspace removed";
      }
      record.status = ActionStatus::ok;
    } catch (const std::exception& e) {
      record.status = ActionStatus::failed;
      record.log = e.what();
      failed_before = true;
    }
    record.duration_ms = elapsed_ms(start);
    run.actions.push_back(std::move(record));
  }
  run.counts = ws.doc.counts();
  try {
    store.save_run(run);
  } catch (const std::exception&) {
    // leaves the vid incomplete; recovery re-runs it
  }
  return run;
}

std::vector<HistoryRow> history(const Store& store) {
  std::vector<HistoryRow> rows;
  for (const auto& v : store.revisions()) {
    HistoryRow row;
    row.revision = v;
    row.run = store.load_run(v.vid);
    row.running = !row.run;
    rows.push_back(std::move(row));
  }

  std::ostringstream html;
  html << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>heterotest history</title>\n"
       << "<style>body{font-family:sans-serif}table{border-collapse:collapse}td,th{border:1px solid #999;"
       << "padding:2px 6px}.passed{color:#060}.failed{color:#a00}.running{color:#666}</style>\n</head>\n<body>\n"
       << "<h1>Virtual revisions</h1>\n";
  if (rows.empty()) {
    html << "<p>No virtual revisions recorded.</p>\n";
  } else {
    html << "<table>\n<tr><th>vid</th><th>revisions</th><th>observed</th><th>passed</th><th>failed</th>"
         << "<th>errors</th><th>report</th></tr>\n";
    for (const auto& row : rows) {
      std::string revs;
      for (const auto& [name, rev] : row.revision.revisions) revs += (revs.empty() ? "" : ", ") + name + "@" + rev;
      html << "<tr><td>" << row.revision.vid << "</td><td>" << html_escape(revs) << "</td><td>"
           << html_escape(row.revision.observed_at) << "</td>";
      if (row.running) {
        html << "<td colspan=\"3\" class=\"running\">running</td><td></td>";
      } else {
        const auto& c = row.run->counts;
        html << "<td>" << c.passed << "</td><td>" << c.failed << "</td><td>" << c.error << "</td><td>";
        if (row.run->report) {
          const std::string href = std::to_string(row.revision.vid) + "/" + *row.run->report;
          const char* cls = c.failed == 0 && c.error == 0 ? "passed" : "failed";
          html << "<a class=\"" << cls << "\" href=\"" << html_escape(href) << "\">report</a>";
        }
        html << "</td>";
      }
      html << "</tr>\n";
    }
    html << "</table>\n";
  }
  html << "</body>\n</html>\n";
  write_text_file(store.root() / "index.html", html.str());
  return rows;
}

}  // namespace heterotest::ci
