#include "dup/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

namespace duprompt {

using nlohmann::json;

double round1(double value) { return std::round(value * 10.0) / 10.0; }

double accuracy_percent(std::size_t correct, std::size_t total) {
  if (total == 0) return 0.0;
  return std::round(1000.0 * static_cast<double>(correct) / static_cast<double>(total)) / 10.0;
}

Report Report::from_transcripts(const std::vector<Transcript>& transcripts) {
  Report r;
  if (!transcripts.empty()) {
    r.dataset = transcripts.front().dataset;
    r.method = std::string(prompts::to_string(transcripts.front().method));
  }
  for (const auto& t : transcripts) {
    ProblemResult pr;
    pr.problem_id = t.problem_id;
    pr.gold = t.gold;
    if (t.graded.predicted) pr.predicted = t.graded.predicted->to_text();
    pr.correct = t.graded.correct;
    pr.source = t.graded.extraction_source;
    pr.error = !t.ok();
    r.correct += pr.correct ? 1 : 0;
    r.errored += pr.error ? 1 : 0;
    r.calls += t.call_count();
    const auto u = t.usage();
    r.usage.prompt_tokens += u.prompt_tokens;
    r.usage.completion_tokens += u.completion_tokens;
    r.results.push_back(std::move(pr));
  }
  r.total = transcripts.size();
  r.accuracy = accuracy_percent(r.correct, r.total);
  r.accuracy_raw = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
  return r;
}

json Report::to_json() const {
  json results_json = json::array();
  for (const auto& p : results) {
    results_json.push_back({{"problem_id", p.problem_id},
                            {"gold", p.gold},
                            {"predicted", p.predicted ? json(*p.predicted) : json(nullptr)},
                            {"correct", p.correct},
                            {"extraction_source", std::string(grading::to_string(p.source))},
                            {"error", p.error}});
  }
  return json{{"config", config},
              {"dataset", dataset},
              {"method", method},
              {"timestamps", {{"started_at", started_at}, {"finished_at", finished_at}}},
              {"total", total},
              {"correct", correct},
              {"errored", errored},
              {"accuracy", accuracy},
              {"accuracy_raw", accuracy_raw},
              {"calls", calls},
              {"usage", {{"prompt_tokens", usage.prompt_tokens}, {"completion_tokens", usage.completion_tokens}}},
              {"results", std::move(results_json)}};
}

Report Report::from_json(const json& j) {
  Report r;
  r.config = j.value("config", json::object());
  r.dataset = j.at("dataset").get<std::string>();
  r.method = j.at("method").get<std::string>();
  if (const auto ts = j.find("timestamps"); ts != j.end()) {
    r.started_at = ts->value("started_at", "");
    r.finished_at = ts->value("finished_at", "");
  }
  r.total = j.at("total").get<std::size_t>();
  r.correct = j.at("correct").get<std::size_t>();
  r.errored = j.value("errored", std::size_t{0});
  r.accuracy = j.at("accuracy").get<double>();
  r.accuracy_raw = j.value("accuracy_raw", 0.0);
  r.calls = j.value("calls", std::size_t{0});
  if (const auto u = j.find("usage"); u != j.end()) {
    r.usage.prompt_tokens = u->value("prompt_tokens", 0);
    r.usage.completion_tokens = u->value("completion_tokens", 0);
  }
  for (const auto& p : j.at("results")) {
    ProblemResult pr;
    pr.problem_id = p.at("problem_id").get<std::string>();
    pr.gold = p.value("gold", "");
    if (const auto& v = p.at("predicted"); !v.is_null()) pr.predicted = v.get<std::string>();
    pr.correct = p.at("correct").get<bool>();
    pr.source = grading::parse_extraction_source(p.value("extraction_source", "none"));
    pr.error = p.value("error", false);
    r.results.push_back(std::move(pr));
  }
  return r;
}

std::string Report::to_text() const {
  std::size_t llm = 0, fallback = 0, none = 0;
  for (const auto& p : results) {
    switch (p.source) {
      case grading::ExtractionSource::llm: ++llm; break;
      case grading::ExtractionSource::rule_fallback: ++fallback; break;
      case grading::ExtractionSource::none: ++none; break;
    }
  }
  const auto stages = config.contains("stages") ? config["stages"].get<std::string>() : std::string{};
  const auto model = config.contains("model") ? config["model"].get<std::string>() : std::string{};
  const auto width = std::max<std::size_t>({6, method.size()});
  const auto col = std::max<std::size_t>({5, dataset.size()});

  std::string out;
  out += fmt::format("Model: {}  Stages: {}\n", model, stages.empty() ? "-" : stages);
  out += fmt::format("{:<{}}  {:>{}}  {:>5}\n", "Method", width, dataset, col, "Avg.");
  out += fmt::format("{:<{}}  {:>{}.1f}  {:>5.1f}\n", method, width, accuracy, col, accuracy);
  out += fmt::format("\ncorrect {}/{}  errors {}  calls {}\n", correct, total, errored, calls);
  out += fmt::format("extraction: llm {}  rule_fallback {}  none {}\n", llm, fallback, none);
  out += fmt::format("tokens: prompt {}  completion {}\n", usage.prompt_tokens, usage.completion_tokens);
  return out;
}

json DeltaTable::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows)
    rows_json.push_back(
        {{"dataset", r.dataset}, {"baseline", r.baseline}, {"candidate", r.candidate}, {"delta", r.delta}});
  return json{{"baseline_method", baseline_method}, {"candidate_method", candidate_method},
              {"rows", std::move(rows_json)},       {"baseline_avg", baseline_avg},
              {"candidate_avg", candidate_avg},     {"delta_avg", delta_avg}};
}

std::string DeltaTable::to_text() const {
  const auto width = std::max<std::size_t>({6, baseline_method.size(), candidate_method.size()});
  std::string head = fmt::format("{:<{}}", "Method", width);
  std::string base = fmt::format("{:<{}}", baseline_method, width);
  std::string cand = fmt::format("{:<{}}", candidate_method, width);
  for (const auto& r : rows) {
    const auto col = std::max<std::size_t>(5, r.dataset.size());
    head += fmt::format("  {:>{}}", r.dataset, col);
    base += fmt::format("  {:>{}.1f}", r.baseline, col);
    cand += fmt::format("  {:>{}.1f}", r.candidate, col);
  }
  head += fmt::format("  {:>5}  {:>6}\n", "Avg.", "Delta");
  base += fmt::format("  {:>5.1f}  {:>6}\n", baseline_avg, "-");
  cand += fmt::format("  {:>5.1f}  {:>+6.1f}\n", candidate_avg, delta_avg);
  return head + base + cand;
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::vector<std::string> symmetric_difference(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::vector<std::string> out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::map<std::string, const Report*> by_dataset(std::span<const Report> reports, std::string_view side) {
  std::map<std::string, const Report*> m;
  for (const auto& r : reports)
    if (!m.emplace(r.dataset, &r).second)
      throw ComparisonError(fmt::format("{} has two reports for dataset {}", side, r.dataset));
  return m;
}

}  // namespace

DeltaTable compare_runs(std::span<const Report> baseline, std::span<const Report> candidate) {
  const auto base = by_dataset(baseline, "baseline");
  const auto cand = by_dataset(candidate, "candidate");
  std::set<std::string> base_sets, cand_sets;
  for (const auto& [d, _] : base) base_sets.insert(d);
  for (const auto& [d, _] : cand) cand_sets.insert(d);
  if (base_sets != cand_sets)
    throw ComparisonError("datasets differ: " + join(symmetric_difference(base_sets, cand_sets)));
  if (base.empty()) throw ComparisonError("nothing to compare");

  DeltaTable t;
  t.baseline_method = baseline.front().method;
  t.candidate_method = candidate.front().method;
  double base_sum = 0.0, cand_sum = 0.0;
  for (const auto& [dataset, b] : base) {
    const Report* c = cand.at(dataset);
    std::set<std::string> b_ids, c_ids;
    for (const auto& p : b->results) b_ids.insert(p.problem_id);
    for (const auto& p : c->results) c_ids.insert(p.problem_id);
    if (b_ids != c_ids)
      throw ComparisonError(
          fmt::format("{}: problem sets differ: {}", dataset, join(symmetric_difference(b_ids, c_ids))));
    t.rows.push_back({dataset, b->accuracy, c->accuracy, round1(c->accuracy - b->accuracy)});
    base_sum += b->accuracy;
    cand_sum += c->accuracy;
  }
  const auto n = static_cast<double>(t.rows.size());
  t.baseline_avg = round1(base_sum / n);
  t.candidate_avg = round1(cand_sum / n);
  t.delta_avg = round1(t.candidate_avg - t.baseline_avg);
  return t;
}

RecountResult recount(const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  RecountResult r;
  const auto dir = out_dir / "transcripts";
  if (!fs::is_directory(dir)) throw std::runtime_error("no transcripts under " + out_dir.string());

  std::map<std::string, bool> regraded;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const auto j = read_json(path);
    const auto type = parse_answer_type(j.at("answer_type").get<std::string>());
    if (!type) throw std::runtime_error("bad answer_type in " + path.string());
    bool correct = false;
    if (const auto& p = j.at("predicted"); !p.is_null()) {
      const auto gold = data::parse_gold_answer(j.at("gold_raw").get<std::string>(), *type);
      const auto predicted = grading::normalize(p.get<std::string>(), *type);
      correct = predicted && grading::grade(*predicted, gold);
    }
    regraded[j.at("problem_id").get<std::string>()] = correct;
    ++r.total;
    r.correct += correct ? 1 : 0;
  }
  r.accuracy = accuracy_percent(r.correct, r.total);

  const auto report_path = out_dir / "report.json";
  if (fs::exists(report_path)) {
    r.report_found = true;
    const auto report = Report::from_json(read_json(report_path));
    for (const auto& p : report.results) {
      const auto it = regraded.find(p.problem_id);
      if (it == regraded.end() || it->second != p.correct) r.mismatched_ids.push_back(p.problem_id);
    }
    r.matches = r.mismatched_ids.empty() && report.total == r.total && report.correct == r.correct &&
                report.accuracy == r.accuracy;
  }
  return r;
}

}  // namespace duprompt
