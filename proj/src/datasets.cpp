#include "dup/datasets.hpp"

#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "text_util.hpp"

namespace duprompt::data {

using nlohmann::json;

namespace {

FieldMap simple_fields(std::string question, std::string answer, std::string id = {}) {
  FieldMap f;
  f.question = {std::move(question)};
  f.answer = std::move(answer);
  f.id = std::move(id);
  return f;
}

std::map<std::string, DatasetInfo> build_known() {
  std::map<std::string, DatasetInfo> m;
  auto add = [&](std::string id, AnswerType type, std::size_t count, FieldMap fields) {
    m.emplace(id, DatasetInfo{id, type, count, std::move(fields)});
  };
  // Field layouts follow the commonly distributed files of each benchmark.
  add("gsm8k", AnswerType::number, 1319, simple_fields("/question", "/answer"));
  add("multiarith", AnswerType::number, 600, simple_fields("/sQuestion", "/lSolutions/0", "/iIndex"));
  add("addsub", AnswerType::number, 395, simple_fields("/sQuestion", "/lSolutions/0", "/iIndex"));
  add("singleeq", AnswerType::number, 508, simple_fields("/sQuestion", "/lSolutions/0", "/iIndex"));
  FieldMap svamp;
  svamp.question = {"/Body", "/Question"};
  svamp.answer = "/Answer";
  svamp.id = "/ID";
  add("svamp", AnswerType::number, 1000, svamp);
  FieldMap aqua = simple_fields("/question", "/correct");
  aqua.options = "/options";
  add("aqua", AnswerType::option, 254, aqua);
  FieldMap csqa = simple_fields("/question/stem", "/answerKey", "/id");
  csqa.options = "/question/choices";
  add("csqa", AnswerType::option, 1221, csqa);
  FieldMap symbolic = simple_fields("/question", "/answer");
  symbolic.records = "/examples";
  add("last_letters", AnswerType::string, 500, symbolic);
  add("coin_flip", AnswerType::yes_no, 500, symbolic);
  add("strategyqa", AnswerType::yes_no, 2290, simple_fields("/question", "/answer", "/qid"));
  return m;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    // Shortest round-trip form, then drop a trailing ".0".
    auto s = v.dump();
    if (s.size() > 2 && s.ends_with(".0")) s.resize(s.size() - 2);
    return s;
  }
  return v.dump();
}

const json* at_pointer(const json& record, const std::string& pointer) {
  if (pointer.empty()) return &record;
  try {
    const json::json_pointer ptr(pointer);
    if (!record.contains(ptr)) return nullptr;
    return &record.at(ptr);
  } catch (const json::exception&) {
    return nullptr;
  }
}

std::vector<Option> parse_options(const json& value, std::size_t line) {
  std::vector<Option> out;
  auto add = [&](char letter, std::string text) {
    const char up = text::to_upper(letter);
    if (up < 'A' || up > 'E') throw DatasetError("option letter out of range A-E: " + std::string(1, letter), line);
    for (const auto& o : out)
      if (o.letter == up) throw DatasetError("duplicate option letter " + std::string(1, up), line);
    out.push_back({up, std::string(text::trim(text))});
  };
  if (value.is_object()) {
    for (const auto& [key, text] : value.items()) {
      if (key.size() != 1) throw DatasetError("option key must be one letter: " + key, line);
      add(key[0], scalar_text(text));
    }
  } else if (value.is_array()) {
    for (const auto& item : value) {
      if (item.is_object()) {
        add(scalar_text(item.at("label")).at(0), scalar_text(item.at("text")));
      } else {
        // "A)21", "(A) 21", "A. 21"
        const auto raw = scalar_text(item);
        auto s = text::trim(raw);
        if (!s.empty() && s.front() == '(') s.remove_prefix(1);
        if (s.size() < 2 || !text::is_alpha(s[0]) || (s[1] != ')' && s[1] != '.' && s[1] != ':'))
          throw DatasetError("unrecognized option format: " + std::string(s), line);
        add(s[0], std::string(s.substr(2)));
      }
    }
  } else {
    throw DatasetError("options must be an array or object", line);
  }
  if (out.size() < 2) throw DatasetError("option problems need at least two options", line);
  return out;
}

std::string with_choices(std::string question, const std::vector<Option>& options) {
  if (question.find("Answer Choices:") != std::string::npos) return question;
  question += " Answer Choices:";
  for (const auto& o : options) {
    question += " (";
    question.push_back(o.letter);
    question += ") ";
    question += o.text;
  }
  return question;
}

Problem make_problem(const json& record, std::size_t index, std::size_t line, const std::string& dataset,
                     AnswerType type, const FieldMap& fields) {
  if (!record.is_object()) throw DatasetError("record is not a JSON object", line);

  std::string question;
  for (const auto& ptr : fields.question) {
    const auto* v = at_pointer(record, ptr);
    if (!v) throw DatasetError("missing question field " + ptr, line);
    auto part = std::string(text::trim(scalar_text(*v)));
    if (part.empty()) continue;
    if (!question.empty()) question.push_back(' ');
    question += part;
  }
  if (question.empty()) throw DatasetError("empty question", line);

  const auto* answer = at_pointer(record, fields.answer);
  if (!answer) throw DatasetError("missing answer field " + fields.answer, line);
  auto gold_raw = scalar_text(*answer);
  if (text::trim(gold_raw).empty()) throw DatasetError("empty answer", line);

  std::string id;
  if (!fields.id.empty()) {
    if (const auto* v = at_pointer(record, fields.id)) id = scalar_text(*v);
  }
  if (id.empty()) id = dataset + "-" + std::to_string(index);

  std::vector<Option> options;
  if (!fields.options.empty()) {
    const auto* v = at_pointer(record, fields.options);
    if (!v) throw DatasetError("missing options field " + fields.options, line);
    options = parse_options(*v, line);
  }
  if (type == AnswerType::option && options.empty() && question.find("Answer Choices:") == std::string::npos)
    throw DatasetError("option problem without options", line);

  auto gold = [&] {
    try {
      return parse_gold_answer(gold_raw, type);
    } catch (const DatasetError& e) {
      throw DatasetError(e.what(), line);
    }
  }();
  if (type == AnswerType::option && !options.empty()) {
    const char letter = *gold.option_value();
    bool found = false;
    for (const auto& o : options) found = found || o.letter == letter;
    if (!found) throw DatasetError("gold letter " + std::string(1, letter) + " is not among the options", line);
  }
  if (!options.empty()) question = with_choices(std::move(question), options);
  return Problem{std::move(id), dataset, std::move(question), std::move(gold_raw), std::move(gold), type,
                 std::move(options)};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read dataset file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

const std::map<std::string, DatasetInfo>& known_datasets() {
  static const auto known = build_known();
  return known;
}

std::string canonical_dataset_id(std::string_view name) {
  auto id = text::lower(name);
  for (char& c : id)
    if (c == '-') c = '_';
  return id;
}

NormalizedAnswer parse_gold_answer(std::string_view raw, AnswerType answer_type) {
  const auto fail = [&](std::string_view why) -> DatasetError {
    return DatasetError(std::string(why) + ": '" + std::string(raw) + "'");
  };
  auto s = text::trim(raw);
  if (s.empty()) throw fail("empty gold answer");
  switch (answer_type) {
    case AnswerType::number: {
      if (const auto pos = s.rfind("#### "); pos != std::string_view::npos) s = text::trim(s.substr(pos + 5));
      std::string digits;
      for (char c : s)
        if (c != ',') digits.push_back(c);
      auto value = Decimal::parse(digits);
      if (!value) throw fail("gold is not a decimal number");
      return NormalizedAnswer::number(*value);
    }
    case AnswerType::option: {
      if (s.size() == 3 && s.front() == '(' && s.back() == ')') s = s.substr(1, 1);
      if (s.size() != 1) throw fail("gold is not a single option letter");
      const char up = text::to_upper(s[0]);
      if (up < 'A' || up > 'E') throw fail("gold option letter out of range A-E");
      return NormalizedAnswer::option(up);
    }
    case AnswerType::yes_no: {
      const auto v = text::lower(s);
      if (v == "yes" || v == "true") return NormalizedAnswer::yes_no(YesNo::yes);
      if (v == "no" || v == "false") return NormalizedAnswer::yes_no(YesNo::no);
      throw fail("gold is not yes/no");
    }
    case AnswerType::string: return NormalizedAnswer::text(text::lower(s));
  }
  throw fail("unknown answer type");
}

LoadedDataset load_dataset(const std::filesystem::path& path, std::string_view dataset_name,
                           const LoadOptions& options) {
  const auto dataset = canonical_dataset_id(dataset_name);
  const auto& known = known_datasets();
  const auto info = known.find(dataset);
  if (info == known.end() && !options.answer_type)
    throw DatasetError("unknown dataset '" + dataset + "' needs an explicit answer_type");
  if (info == known.end() && !options.fields)
    throw DatasetError("unknown dataset '" + dataset + "' needs a field map");
  const AnswerType type = options.answer_type.value_or(info != known.end() ? info->second.answer_type : AnswerType::string);
  const FieldMap fields = options.fields.value_or(info != known.end() ? info->second.fields : FieldMap{});

  const auto content = read_file(path);
  LoadedDataset out;

  const auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos) {
    json whole;
    bool whole_ok = true;
    try {
      whole = json::parse(content);
    } catch (const json::exception&) {
      whole_ok = false;
    }

    if (whole_ok && (whole.is_array() || !fields.records.empty())) {
      const json* records = &whole;
      if (!whole.is_array()) {
        records = at_pointer(whole, fields.records);
        if (!records || !records->is_array())
          throw DatasetError("no record array at " + fields.records + " in " + path.string());
      }
      std::size_t index = 0;
      for (const auto& record : *records) {
        out.problems.push_back(make_problem(record, index, index + 1, dataset, type, fields));
        ++index;
      }
    } else {
      std::istringstream lines(content);
      std::string line;
      std::size_t line_no = 0;
      std::size_t index = 0;
      while (std::getline(lines, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        json record;
        try {
          record = json::parse(line);
        } catch (const json::exception& e) {
          throw DatasetError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        out.problems.push_back(make_problem(record, index, line_no, dataset, type, fields));
        ++index;
      }
    }
  }

  if (info != known.end() && out.problems.size() != info->second.expected_count) {
    out.warnings.push_back(dataset + ": loaded " + std::to_string(out.problems.size()) + " problems, expected " +
                           std::to_string(info->second.expected_count));
    spdlog::warn("{}", out.warnings.back());
  }
  return out;
}

std::map<std::string, ManifestEntry> load_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DatasetError("cannot read manifest " + manifest.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DatasetError("manifest " + manifest.string() + ": " + e.what());
  }
  std::map<std::string, ManifestEntry> out;
  const auto base = manifest.parent_path();
  try {
    for (const auto& [id, entry] : j.at("datasets").items()) {
      ManifestEntry m;
      std::filesystem::path p = entry.at("path").get<std::string>();
      m.path = p.is_absolute() ? p : base / p;
      if (entry.contains("answer_type")) {
        const auto name = entry.at("answer_type").get<std::string>();
        m.options.answer_type = parse_answer_type(name);
        if (!m.options.answer_type) throw DatasetError("manifest: unknown answer_type " + name);
      }
      if (entry.contains("fields")) {
        const auto& f = entry.at("fields");
        FieldMap fields;
        fields.records = f.value("records", "");
        const auto& q = f.at("question");
        fields.question = q.is_array() ? q.get<std::vector<std::string>>() : std::vector<std::string>{q.get<std::string>()};
        fields.answer = f.at("answer").get<std::string>();
        fields.id = f.value("id", "");
        fields.options = f.value("options", "");
        m.options.fields = std::move(fields);
      }
      out.emplace(canonical_dataset_id(id), std::move(m));
    }
  } catch (const json::exception& e) {
    throw DatasetError("manifest " + manifest.string() + ": " + e.what());
  }
  return out;
}

}  // namespace duprompt::data
