#include <filesystem>
#include <sstream>

#include "catch2/catch_amalgamated.hpp"
#include "helpers.hpp"
#include "hypotax/cascade.hpp"

using namespace hypotax;
using testutil::make_sentence;

TEST_CASE("merge_spans concatenates runs and records provenance", "[cascade]") {
  Sentence s = make_sentence({{"如何", "r"},
                              {"安装", "v"},
                              {"备份", "n"},
                              {"域", "n"},
                              {"控制", "n"},
                              {"器", "n"}});
  LabelSequence labels = {Label::O, Label::O, Label::B,
                          Label::I, Label::B, Label::I};
  MergedSentence m = merge_spans(s, labels);
  REQUIRE(m.sentence.size() == 4);
  CHECK(m.sentence.tokens[0].surface == "如何");
  CHECK(m.sentence.tokens[1].surface == "安装");
  CHECK(m.sentence.tokens[2].surface == "备份域");
  CHECK(m.sentence.tokens[3].surface == "控制器");
  CHECK(m.sentence.tokens[0].pos == "r");
  CHECK(m.sentence.tokens[1].pos == "v");
  CHECK(m.sentence.tokens[2].pos == "TERM");
  CHECK(m.sentence.tokens[3].pos == "TERM");
  REQUIRE(m.provenance.size() == 4);
  CHECK((m.provenance[0].start == 0 && m.provenance[0].end == 0 &&
         !m.provenance[0].is_term));
  CHECK((m.provenance[1].start == 1 && m.provenance[1].end == 1 &&
         !m.provenance[1].is_term));
  CHECK((m.provenance[2].start == 2 && m.provenance[2].end == 3 &&
         m.provenance[2].is_term));
  CHECK((m.provenance[3].start == 4 && m.provenance[3].end == 5 &&
         m.provenance[3].is_term));
}

TEST_CASE("merge_spans rejects invalid sequences", "[cascade]") {
  Sentence s = make_sentence({{"备份", "n"}, {"域", "n"}});
  CHECK_THROWS_AS(merge_spans(s, {Label::I, Label::I}), ContractError);
  CHECK_THROWS_AS(merge_spans(s, {Label::O, Label::I}), ContractError);
  CHECK_THROWS_AS(merge_spans(s, {Label::B}), ContractError);
}

TEST_CASE("4-column corpus parses into both layers", "[cascade]") {
  std::istringstream in(testutil::worked_example_text());
  CascadeTrainData data = parse_cascade_corpus(in, "c.tsv");
  REQUIRE(data.corpus.sentences.size() == 1);
  CHECK(data.corpus.gold[0] == LabelSequence{Label::O, Label::O, Label::B,
                                             Label::I, Label::B, Label::I});
  REQUIRE(data.merged_sentences.size() == 1);
  REQUIRE(data.merged_sentences[0].size() == 4);
  CHECK(data.merged_sentences[0].tokens[2].surface == "备份域");
  CHECK(data.merged_gold[0] ==
        LabelSequence{Label::O, Label::O, Label::B, Label::I});
  Corpus merged = data.merged_corpus();
  CHECK(merged.has_gold());
  CHECK(merged.sentences[0].tokens[3].surface == "控制器");
}

TEST_CASE("4-column parser reports alignment mistakes", "[cascade]") {
  using Catch::Matchers::ContainsSubstring;
  // Layer-2 label missing on the first row of a span.
  std::istringstream a("备份\tn\tB\t_\n域\tn\tI\t_\n");
  CHECK_THROWS_WITH(parse_cascade_corpus(a, "c.tsv"),
                    ContainsSubstring("expected a layer-2 label") &&
                        ContainsSubstring("got '_'"));
  // Layer-2 label on a continuation row.
  std::istringstream b("备份\tn\tB\tB\n域\tn\tI\tI\n");
  CHECK_THROWS_WITH(parse_cascade_corpus(b, "c.tsv"),
                    ContainsSubstring("continuation rows must carry '_'"));
  // Wrong column count.
  std::istringstream c("备份\tn\tB\n");
  CHECK_THROWS_WITH(parse_cascade_corpus(c, "c.tsv"),
                    ContainsSubstring("expected 4 columns, got 3"));
  // Layer-2 sequence itself must be a valid BIO chain.
  std::istringstream d("如何\tr\tO\tO\n备份\tn\tB\tI\n");
  CHECK_THROWS_WITH(parse_cascade_corpus(d, "c.tsv"),
                    ContainsSubstring("invalid layer-2 sequence"));
  // Layer-1 consistency still enforced.
  std::istringstream e("如何\tr\tO\tO\n域\tn\tI\t_\n");
  CHECK_THROWS_WITH(parse_cascade_corpus(e, "c.tsv"),
                    ContainsSubstring("label consistency"));
}

TEST_CASE("cascade training reproduces the worked example", "[cascade]") {
  CascadeTrainData data = testutil::worked_example_data();
  TrainConfig config;
  config.max_iterations = 80;
  CascadeModel model = train_cascade(data, config, config);

  TagResult r = tag_cascade(model, data.corpus.sentences[0]);
  CHECK(r.low_labels == data.corpus.gold[0]);
  REQUIRE(r.merged.sentence.size() == 4);
  CHECK(r.merged.sentence.tokens[2].surface == "备份域");
  CHECK(r.high_labels == data.merged_gold[0]);

  // The layers carry their own entropy tables: the low layer has never seen
  // the merged surface, the high layer has.
  CHECK(model.high.entropies().find("备份域") != nullptr);
  CHECK(model.low.entropies().find("备份域") == nullptr);

  TermInventory inv = extract_terms(model, data.corpus);
  REQUIRE(inv.simple.size() == 2);
  CHECK(inv.simple.at("备份域") == 1);
  CHECK(inv.simple.at("控制器") == 1);
  REQUIRE(inv.complex.size() == 1);
  CHECK(inv.complex.at("备份域控制器") == 1);
}

TEST_CASE("complex spans must add structure over the raw stream", "[cascade]") {
  Sentence s = make_sentence({{"如何", "r"}, {"备份", "n"}, {"域", "n"}});
  MergedSentence m = merge_spans(s, {Label::O, Label::B, Label::I});
  REQUIRE(m.sentence.size() == 2);
  // Multi-token span qualifies regardless of provenance.
  CHECK(complex_span_qualifies(m, 0, 1));
  // Single merged term token qualifies; single ordinary token does not.
  CHECK(complex_span_qualifies(m, 1, 1));
  CHECK_FALSE(complex_span_qualifies(m, 0, 0));
}

TEST_CASE("inventory frequencies sum across layers", "[cascade]") {
  TermInventory inv;
  inv.simple["备份域"] = 2;
  inv.complex["备份域"] = 3;
  inv.complex["控制器"] = 1;
  auto f = inv.frequencies();
  CHECK(f.at("备份域") == 5);
  CHECK(f.at("控制器") == 1);
  auto concepts = inv.concepts();
  REQUIRE(concepts.size() == 2);
  CHECK(std::is_sorted(concepts.begin(), concepts.end()));
}

TEST_CASE("inventory round-trips through its file format", "[cascade]") {
  TermInventory inv;
  inv.simple["备份域"] = 4;
  inv.simple["控制器"] = 2;
  inv.complex["备份域控制器"] = 1;
  CHECK(inventory_to_string(inv) ==
        "备份域\tsimple\t4\n控制器\tsimple\t2\n备份域控制器\tcomplex\t1\n");
  auto path = std::filesystem::temp_directory_path() / "hypotax_test_inv.tsv";
  save_inventory(inv, path);
  TermInventory back = load_inventory(path);
  CHECK(back.simple == inv.simple);
  CHECK(back.complex == inv.complex);
  std::filesystem::remove(path);
}

TEST_CASE("inventory loader rejects malformed rows", "[cascade]") {
  auto path = std::filesystem::temp_directory_path() / "hypotax_test_badinv.tsv";
  {
    std::ofstream out(path);
    out << "备份域\tmedium\t4\n";
  }
  CHECK_THROWS_WITH(load_inventory(path),
                    Catch::Matchers::ContainsSubstring("unknown layer 'medium'"));
  std::filesystem::remove(path);
}

TEST_CASE("synthetic cascades train to high accuracy", "[cascade]") {
  std::mt19937 rng(77);
  CascadeTrainData data = testutil::synth_cascade(rng, 60);
  TrainConfig config;
  config.max_iterations = 120;
  config.gradient_tolerance = 1e-3;
  CascadeModel model = train_cascade(data, config, config);

  // Per-token accuracy on the training corpus itself, both layers measured
  // against gold inputs (the high layer sees the gold-merged stream).
  std::size_t low_ok = 0, low_n = 0, high_ok = 0, high_n = 0;
  for (std::size_t si = 0; si < data.corpus.sentences.size(); ++si) {
    const Sentence& s = data.corpus.sentences[si];
    auto low = viterbi_decode(model.low, s, model.low.features_for(s));
    for (std::size_t i = 0; i < low.size(); ++i) {
      ++low_n;
      if (low[i] == data.corpus.gold[si][i]) ++low_ok;
    }
    const Sentence& m = data.merged_sentences[si];
    auto high = viterbi_decode(model.high, m, model.high.features_for(m));
    for (std::size_t i = 0; i < high.size(); ++i) {
      ++high_n;
      if (high[i] == data.merged_gold[si][i]) ++high_ok;
    }
  }
  CHECK(static_cast<double>(low_ok) / low_n >= 0.99);
  CHECK(static_cast<double>(high_ok) / high_n >= 0.99);
}
