#include <gtest/gtest.h>

#include "dup/datasets.hpp"
#include "fixtures.hpp"

using namespace duprompt;
using namespace duprompt::data;
using fixtures::TempDir;
using fixtures::write_file;

TEST(KnownDatasets, TenBenchmarksWithCounts) {
  const auto& known = known_datasets();
  ASSERT_EQ(known.size(), 10u);
  EXPECT_EQ(known.at("gsm8k").expected_count, 1319u);
  EXPECT_EQ(known.at("svamp").expected_count, 1000u);
  EXPECT_EQ(known.at("aqua").answer_type, AnswerType::option);
  EXPECT_EQ(known.at("csqa").answer_type, AnswerType::option);
  EXPECT_EQ(known.at("strategyqa").answer_type, AnswerType::yes_no);
  EXPECT_EQ(known.at("coin_flip").answer_type, AnswerType::yes_no);
  EXPECT_EQ(known.at("last_letters").answer_type, AnswerType::string);
  EXPECT_EQ(canonical_dataset_id("Coin-Flip"), "coin_flip");
}

TEST(GoldParsing, PerType) {
  EXPECT_EQ(parse_gold_answer("Some work\n#### 1,234", AnswerType::number).to_text(), "1234");
  EXPECT_EQ(parse_gold_answer("18.0", AnswerType::number).to_text(), "18");
  EXPECT_EQ(parse_gold_answer("(c)", AnswerType::option).to_text(), "C");
  EXPECT_EQ(parse_gold_answer("True", AnswerType::yes_no).to_text(), "yes");
  EXPECT_EQ(parse_gold_answer(" NKMK ", AnswerType::string).to_text(), "nkmk");
  EXPECT_THROW(parse_gold_answer("twelve", AnswerType::number), DatasetError);
  EXPECT_THROW(parse_gold_answer("F", AnswerType::option), DatasetError);
  EXPECT_THROW(parse_gold_answer("maybe", AnswerType::yes_no), DatasetError);
  EXPECT_THROW(parse_gold_answer("  ", AnswerType::string), DatasetError);
}

TEST(LoadDataset, GsmJsonLinesFullSize) {
  TempDir dir;
  std::string content;
  for (int i = 0; i < 1319; ++i)
    content += R"({"question": "What is )" + std::to_string(i) + R"( plus 1?", "answer": "It is #### )" +
               std::to_string(i + 1) + "\"}\n";
  write_file(dir / "test.jsonl", content);
  const auto loaded = load_dataset(dir / "test.jsonl", "gsm8k");
  ASSERT_EQ(loaded.problems.size(), 1319u);
  EXPECT_TRUE(loaded.warnings.empty());
  EXPECT_EQ(loaded.problems[0].id, "gsm8k-0");
  EXPECT_EQ(loaded.problems[1318].gold.to_text(), "1319");
  EXPECT_EQ(loaded.problems[5].question, "What is 5 plus 1?");
}

TEST(LoadDataset, CountMismatchWarns) {
  const auto loaded = load_dataset(fixtures::data("synthetic10.jsonl"), "gsm8k");
  EXPECT_EQ(loaded.problems.size(), 10u);
  ASSERT_EQ(loaded.warnings.size(), 1u);
  EXPECT_NE(loaded.warnings[0].find("expected 1319"), std::string::npos);
}

TEST(LoadDataset, SvampArrayJoinsBodyAndQuestion) {
  TempDir dir;
  write_file(dir / "svamp.json",
             R"([{"ID": "chal-1", "Body": "Jack had 8 pens.", "Question": "He lost 3. How many are left?",
                  "Answer": 5.0},
                 {"ID": "chal-2", "Body": "A bag has 2.5 kg.", "Question": "What is double?", "Answer": 5}])");
  const auto loaded = load_dataset(dir / "svamp.json", "svamp");
  ASSERT_EQ(loaded.problems.size(), 2u);
  EXPECT_EQ(loaded.problems[0].id, "chal-1");
  EXPECT_EQ(loaded.problems[0].question, "Jack had 8 pens. He lost 3. How many are left?");
  EXPECT_EQ(loaded.problems[0].gold.to_text(), "5");
}

TEST(LoadDataset, MultiArithIndexIds) {
  TempDir dir;
  write_file(dir / "ma.json", R"([{"iIndex": 7, "sQuestion": "2 and 3?", "lSolutions": [5.0]}])");
  const auto p = load_dataset(dir / "ma.json", "multiarith").problems.at(0);
  EXPECT_EQ(p.id, "7");
  EXPECT_EQ(p.gold.to_text(), "5");
}

TEST(LoadDataset, AquaOptionsAppended) {
  TempDir dir;
  write_file(dir / "aqua.jsonl",
             R"({"question": "Pick two plus two.", "options": ["A)3", "B)4", "C)5", "D)6", "E)7"], "correct": "B"})"
             "\n");
  const auto p = load_dataset(dir / "aqua.jsonl", "aqua").problems.at(0);
  EXPECT_EQ(p.answer_type, AnswerType::option);
  EXPECT_EQ(p.options.size(), 5u);
  EXPECT_EQ(p.question, "Pick two plus two. Answer Choices: (A) 3 (B) 4 (C) 5 (D) 6 (E) 7");
  EXPECT_EQ(p.gold.to_text(), "B");
}

TEST(LoadDataset, CsqaNestedFields) {
  TempDir dir;
  write_file(dir / "csqa.jsonl",
             R"({"id": "abc", "question": {"stem": "Where do fish live?", "choices": [{"label": "A", "text": "sea"},)"
             R"( {"label": "B", "text": "desert"}]}, "answerKey": "A"})"
             "\n");
  const auto p = load_dataset(dir / "csqa.jsonl", "csqa").problems.at(0);
  EXPECT_EQ(p.id, "abc");
  EXPECT_EQ(p.question, "Where do fish live? Answer Choices: (A) sea (B) desert");
}

TEST(LoadDataset, SymbolicRecordsObject) {
  TempDir dir;
  write_file(dir / "ll.json",
             R"({"examples": [{"question": "Take the last letters of \"Elon Musk\".", "answer": "nk"}]})");
  const auto p = load_dataset(dir / "ll.json", "last_letters").problems.at(0);
  EXPECT_EQ(p.gold.to_text(), "nk");
  EXPECT_EQ(p.answer_type, AnswerType::string);
}

TEST(LoadDataset, StrategyQaBooleans) {
  TempDir dir;
  write_file(dir / "sqa.json", R"([{"qid": "q1", "question": "Is water wet?", "answer": true},
                                   {"qid": "q2", "question": "Can fish fly?", "answer": false}])");
  const auto loaded = load_dataset(dir / "sqa.json", "strategyqa");
  EXPECT_EQ(loaded.problems[0].gold.to_text(), "yes");
  EXPECT_EQ(loaded.problems[1].gold.to_text(), "no");
}

TEST(LoadDataset, ErrorsCarryLineNumbers) {
  TempDir dir;
  write_file(dir / "bad.jsonl", "{\"question\": \"ok\", \"answer\": \"#### 1\"}\n\n{\"question\": \"q\"}\n");
  try {
    load_dataset(dir / "bad.jsonl", "gsm8k");
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("answer"), std::string::npos);
  }

  write_file(dir / "broken.jsonl", "{\"question\": \"ok\", \"answer\": \"#### 1\"}\n{oops\n");
  try {
    load_dataset(dir / "broken.jsonl", "gsm8k");
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_EQ(e.line(), 2u);
  }

  write_file(dir / "gold.jsonl", "{\"question\": \"ok\", \"answer\": \"#### many\"}\n");
  try {
    load_dataset(dir / "gold.jsonl", "gsm8k");
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("many"), std::string::npos);
  }
}

TEST(LoadDataset, OptionGoldMustBeListed) {
  TempDir dir;
  write_file(dir / "aqua.jsonl", R"({"question": "q", "options": ["A)1", "B)2"], "correct": "D"})" "\n");
  EXPECT_THROW(load_dataset(dir / "aqua.jsonl", "aqua"), DatasetError);
  write_file(dir / "dup.jsonl", R"({"question": "q", "options": ["A)1", "A)2"], "correct": "A"})" "\n");
  EXPECT_THROW(load_dataset(dir / "dup.jsonl", "aqua"), DatasetError);
}

TEST(LoadDataset, UnknownDatasetNeedsTypeAndFields) {
  TempDir dir;
  write_file(dir / "x.jsonl", R"({"q": "hi", "a": "yes"})" "\n");
  EXPECT_THROW(load_dataset(dir / "x.jsonl", "custom"), DatasetError);
  LoadOptions opts;
  opts.answer_type = AnswerType::yes_no;
  FieldMap f;
  f.question = {"/q"};
  f.answer = "/a";
  opts.fields = f;
  const auto loaded = load_dataset(dir / "x.jsonl", "custom", opts);
  EXPECT_EQ(loaded.problems.at(0).gold.to_text(), "yes");
  EXPECT_TRUE(loaded.warnings.empty());
}

TEST(LoadDataset, MissingFile) { EXPECT_THROW(load_dataset("/nonexistent/file.jsonl", "gsm8k"), DatasetError); }

TEST(Manifest, ResolvesRelativePaths) {
  TempDir dir;
  write_file(dir / "data" / "g.jsonl", "{\"question\": \"q\", \"answer\": \"#### 2\"}\n");
  write_file(dir / "manifest.json", R"({"datasets": {
      "GSM8K": {"path": "data/g.jsonl"},
      "mine": {"path": "/abs/m.jsonl", "answer_type": "string", "fields": {"question": ["/a", "/b"], "answer": "/c"}}}})");
  const auto m = load_manifest(dir / "manifest.json");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.at("gsm8k").path, dir.path() / "data" / "g.jsonl");
  EXPECT_EQ(m.at("mine").path, "/abs/m.jsonl");
  EXPECT_EQ(m.at("mine").options.answer_type, AnswerType::string);
  EXPECT_EQ(m.at("mine").options.fields->question.size(), 2u);
  EXPECT_EQ(load_dataset(m.at("gsm8k").path, "gsm8k", m.at("gsm8k").options).problems.size(), 1u);

  write_file(dir / "bad.json", R"({"datasets": {"x": {"answer_type": "number"}}})");
  EXPECT_THROW(load_manifest(dir / "bad.json"), DatasetError);
}
