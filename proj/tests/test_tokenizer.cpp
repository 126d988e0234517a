#include <stdexcept>
#include <string>
#include <vector>

#include "absa/corpus.hpp"
#include "absa/tokenizer.hpp"
#include "doctest.h"

using namespace absa;

namespace {

LabeledSentence sentence_of(const std::string& id, const std::string& text) {
  LabeledSentence s;
  s.id = id;
  s.text = text;
  s.tokens = tokenize(text);
  return s;
}

const std::string kCafeText =
    "The ambience was nice , but the service was not so great .";

}  // namespace

TEST_CASE("tokenize records faithful character offsets") {
  TokenSeq seq = tokenize("The ambience was nice");
  REQUIRE(seq.size() == 4);
  CHECK(seq[0].surface == "The");
  CHECK(seq[0].char_start == 0);
  CHECK(seq[0].char_end == 3);
  CHECK(seq[1].surface == "ambience");
  CHECK(seq[1].char_start == 4);
  CHECK(seq[1].char_end == 12);
  CHECK(seq[2].char_start == 13);
  CHECK(seq[2].char_end == 16);
  CHECK(seq[3].char_start == 17);
  CHECK(seq[3].char_end == 21);
}

TEST_CASE("tokenize of empty text yields an empty sequence") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("   ").empty());
}

TEST_CASE("tokenize keeps clitic-style tokens whole") {
  TokenSeq seq = tokenize("was n't so fresh");
  REQUIRE(seq.size() == 4);
  CHECK(seq[1].surface == "n't");
}

TEST_CASE("every token surface equals its source substring") {
  std::string text = "Rice is too dry , tuna was n't so fresh either .";
  TokenSeq seq = tokenize(text);
  for (const Token& t : seq.tokens) {
    CHECK(text.substr(static_cast<size_t>(t.char_start),
                      static_cast<size_t>(t.char_end - t.char_start)) == t.surface);
  }
}

TEST_CASE("tokenize handles tabs, newlines and leading/trailing space") {
  TokenSeq seq = tokenize("  a\tb\nc  ");
  REQUIRE(seq.size() == 3);
  CHECK(seq[0].surface == "a");
  CHECK(seq[1].surface == "b");
  CHECK(seq[2].surface == "c");
  CHECK(seq[2].char_start == 6);
}

TEST_CASE("span_chars_to_tokens maps exact char extents") {
  TokenSeq seq = tokenize(kCafeText);
  CHECK(span_chars_to_tokens(4, 12, seq) == TokenSpan{1, 2});    // ambience
  CHECK(span_chars_to_tokens(44, 56, seq) == TokenSpan{9, 12});  // not so great
  CHECK(seq.join(TokenSpan{9, 12}) == "not so great");
}

TEST_CASE("span_chars_to_tokens rejects boundaries inside a token") {
  TokenSeq seq = tokenize(kCafeText);
  CHECK_THROWS_WITH_AS(span_chars_to_tokens(0, 2, seq),
                       doctest::Contains("The"), std::runtime_error);
  CHECK_THROWS_AS(span_chars_to_tokens(5, 12, seq), std::runtime_error);
}

TEST_CASE("join concatenates surfaces with single spaces") {
  TokenSeq seq = tokenize("a\t b   c");
  CHECK(seq.join(TokenSpan{0, 3}) == "a b c");
  CHECK(seq.join(TokenSpan{1, 2}) == "b");
}

TEST_CASE("query templates validate the placeholder count") {
  QueryTemplates good;
  CHECK_NOTHROW(good.validate());

  QueryTemplates none = good;
  none.right = "Find the opinions.";
  CHECK_THROWS_AS(none.validate(), std::invalid_argument);

  QueryTemplates two = good;
  two.right = "Find {} and {} now.";
  CHECK_THROWS_AS(two.validate(), std::invalid_argument);
}

TEST_CASE("right query substitutes the aspect surface") {
  QueryTemplates t;
  std::string q = t.make_right_query("battery life");
  CHECK(q ==
        "Find the sentiment polarity and opinion terms for battery life in the text.");
}

TEST_CASE("vocab reserves the special ids") {
  Vocab v;
  CHECK(v.id_of("[PAD]") == Vocab::kPad);
  CHECK(v.id_of("[UNK]") == Vocab::kUnk);
  CHECK(v.id_of("[CLS]") == Vocab::kCls);
  CHECK(v.id_of("[SEP]") == Vocab::kSep);
  CHECK(v.size() == 4);
  CHECK(v.id_of("anything") == Vocab::kUnk);
}

TEST_CASE("vocab lookup lowercases") {
  Vocab v;
  v.add("ambience");
  CHECK(v.id_of("Ambience") == v.id_of("ambience"));
  CHECK(v.contains("AMBIENCE"));
}

TEST_CASE("build_vocab applies the frequency threshold") {
  std::vector<LabeledSentence> corpus = {sentence_of("s0", "a a b")};
  QueryTemplates t;
  Vocab v = build_vocab(corpus, t, 2);
  CHECK(v.contains("a"));
  CHECK(!v.contains("b"));

  Vocab all = build_vocab(corpus, t, 1);
  CHECK(all.contains("a"));
  CHECK(all.contains("b"));
}

TEST_CASE("template tokens survive any threshold") {
  std::vector<LabeledSentence> corpus = {sentence_of("s0", "something else")};
  QueryTemplates t;
  Vocab v = build_vocab(corpus, t, 1000000);
  for (const std::string& tok : t.all_tokens()) CHECK(v.contains(tok));
  CHECK(!v.contains("something"));
}

TEST_CASE("build_vocab assigns identical ids on identical input") {
  std::vector<LabeledSentence> corpus = {
      sentence_of("s0", kCafeText),
      sentence_of("s1", "Rice is too dry , tuna was n't so fresh either ."),
  };
  QueryTemplates t;
  Vocab a = build_vocab(corpus, t, 1);
  Vocab b = build_vocab(corpus, t, 1);
  REQUIRE(a.size() == b.size());
  for (int id = 0; id < a.size(); ++id) CHECK(a.token_of(id) == b.token_of(id));
}

TEST_CASE("build_vocab rejects an empty corpus") {
  CHECK_THROWS_AS(build_vocab({}, QueryTemplates{}, 1), std::invalid_argument);
}

TEST_CASE("vocab round-trips through its JSON file") {
  std::vector<LabeledSentence> corpus = {sentence_of("s0", kCafeText)};
  Vocab v = build_vocab(corpus, QueryTemplates{}, 1);
  std::string path = "vocab_roundtrip_test.json";
  v.save(path);
  Vocab back = Vocab::load(path);
  REQUIRE(back.size() == v.size());
  for (int id = 0; id < v.size(); ++id) CHECK(back.token_of(id) == v.token_of(id));
  std::remove(path.c_str());
}

TEST_CASE("encode_pair produces the [CLS] query [SEP] context [SEP] layout") {
  std::vector<LabeledSentence> corpus = {sentence_of("s0", kCafeText)};
  QueryTemplates t;
  Vocab v = build_vocab(corpus, t, 1);

  std::vector<std::string> query = {"q1", "q2", "q3", "q4", "q5", "q6", "q7"};
  TokenSeq context = tokenize(kCafeText);
  REQUIRE(context.size() == 13);

  EncodedInput enc = encode_pair(query, context, v, 64);
  CHECK(enc.seq_len() == 23);  // 1 + 7 + 1 + 13 + 1
  CHECK(enc.context_offset == 9);
  CHECK(enc.context_len == 13);
  CHECK(enc.ids[0] == Vocab::kCls);
  CHECK(enc.ids[8] == Vocab::kSep);
  CHECK(enc.ids[22] == Vocab::kSep);
  CHECK(enc.segment_marks[0] == 0);
  CHECK(enc.segment_marks[8] == 0);
  CHECK(enc.segment_marks[9] == 1);
  CHECK(enc.segment_marks[22] == 1);
  for (uint8_t m : enc.attention_mask) CHECK(m == 1);
  // Sequence position of context token i and back.
  for (int i = 0; i < enc.context_len; ++i) CHECK(enc.context_pos(i) == 9 + i);
}

TEST_CASE("encode_pair pads to the requested length with [PAD]") {
  Vocab v;
  int wid = v.add("w");
  TokenSeq context = tokenize("w w");
  EncodedInput enc = encode_pair({"w"}, context, v, 16, "", 10);
  CHECK(enc.seq_len() == 10);
  CHECK(enc.ids[1] == wid);
  for (int i = 6; i < 10; ++i) {
    CHECK(enc.ids[static_cast<size_t>(i)] == Vocab::kPad);
    CHECK(enc.attention_mask[static_cast<size_t>(i)] == 0);
  }
  CHECK(enc.context_offset == 3);
  CHECK(enc.context_len == 2);
}

TEST_CASE("encode_pair maps unknown words to [UNK]") {
  Vocab v;
  EncodedInput enc = encode_pair({"mystery"}, tokenize("novel"), v, 8);
  CHECK(enc.ids[1] == Vocab::kUnk);
  CHECK(enc.ids[3] == Vocab::kUnk);
}

TEST_CASE("encode_pair rejects over-length input naming the sentence") {
  Vocab v;
  TokenSeq context = tokenize("one two three four five");
  CHECK_THROWS_WITH_AS(encode_pair({"q"}, context, v, 6, "sent-42"),
                       doctest::Contains("sent-42"), std::runtime_error);
}

TEST_CASE("single-token context encodes with context_len 1") {
  Vocab v;
  EncodedInput enc = encode_pair({"q"}, tokenize("word"), v, 8);
  CHECK(enc.context_len == 1);
  CHECK(enc.seq_len() == 5);
}
