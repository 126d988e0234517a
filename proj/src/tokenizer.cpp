#include "absa/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "absa/corpus.hpp"

namespace absa {

using nlohmann::json;

const char* to_string(Polarity p) {
  switch (p) {
    case Polarity::Positive: return "POS";
    case Polarity::Neutral: return "NEU";
    case Polarity::Negative: return "NEG";
  }
  throw std::logic_error("bad polarity value");
}

Polarity parse_polarity(const std::string& s) {
  if (s == "POS") return Polarity::Positive;
  if (s == "NEU") return Polarity::Neutral;
  if (s == "NEG") return Polarity::Negative;
  throw std::runtime_error("unknown polarity string: \"" + s + "\"");
}

std::string to_string(const TokenSpan& s) {
  return "[" + std::to_string(s.start) + "," + std::to_string(s.end) + ")";
}

std::string TokenSeq::join(const TokenSpan& span) const {
  std::string out;
  for (int i = span.start; i < span.end; ++i) {
    if (i > span.start) out += ' ';
    out += tokens[static_cast<size_t>(i)].surface;
  }
  return out;
}

std::vector<std::string> TokenSeq::surfaces() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

TokenSeq tokenize(const std::string& text) {
  TokenSeq seq;
  int n = static_cast<int>(text.size());
  int i = 0;
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[static_cast<size_t>(i)]))) ++i;
    if (i >= n) break;
    int start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(text[static_cast<size_t>(i)]))) ++i;
    seq.tokens.push_back(Token{text.substr(static_cast<size_t>(start),
                                           static_cast<size_t>(i - start)),
                               start, i});
  }
  return seq;
}

TokenSpan span_chars_to_tokens(int char_start, int char_end, const TokenSeq& seq) {
  if (char_start < 0 || char_start >= char_end) {
    throw std::runtime_error("invalid char span [" + std::to_string(char_start) +
                             "," + std::to_string(char_end) + ")");
  }
  int first = -1, last = -1;
  for (int i = 0; i < seq.size(); ++i) {
    const Token& t = seq[i];
    if (t.char_start == char_start) first = i;
    if (t.char_end == char_end) last = i;
    // A boundary strictly inside a token can never align.
    if ((char_start > t.char_start && char_start < t.char_end) ||
        (char_end > t.char_start && char_end < t.char_end)) {
      throw std::runtime_error("char span [" + std::to_string(char_start) + "," +
                               std::to_string(char_end) +
                               ") splits token \"" + t.surface + "\" at chars [" +
                               std::to_string(t.char_start) + "," +
                               std::to_string(t.char_end) + ")");
    }
  }
  if (first < 0 || last < 0 || last < first) {
    throw std::runtime_error("char span [" + std::to_string(char_start) + "," +
                             std::to_string(char_end) +
                             ") does not align with token boundaries");
  }
  return TokenSpan{first, last + 1};
}

void QueryTemplates::validate() const {
  size_t pos = right.find("{}");
  if (pos == std::string::npos ||
      right.find("{}", pos + 2) != std::string::npos) {
    throw std::invalid_argument(
        "right query template must contain exactly one {} placeholder: \"" +
        right + "\"");
  }
}

std::string QueryTemplates::make_right_query(const std::string& aspect_text) const {
  validate();
  std::string out = right;
  out.replace(out.find("{}"), 2, aspect_text);
  return out;
}

std::vector<std::string> QueryTemplates::all_tokens() const {
  validate();
  std::string right_stripped = right;
  right_stripped.replace(right_stripped.find("{}"), 2, "");
  std::vector<std::string> out;
  for (const std::string& text : {left, right_stripped, opinion_only}) {
    for (const Token& t : tokenize(text).tokens) out.push_back(t.surface);
  }
  return out;
}

Vocab::Vocab() {
  // Reserved ids, fixed by contract.
  add("[PAD]");
  add("[UNK]");
  add("[CLS]");
  add("[SEP]");
}

int Vocab::add(const std::string& lowercase_token) {
  auto it = ids_.find(lowercase_token);
  if (it != ids_.end()) return it->second;
  int id = static_cast<int>(tokens_.size());
  ids_.emplace(lowercase_token, id);
  tokens_.push_back(lowercase_token);
  return id;
}

int Vocab::id_of(std::string_view token) const {
  // Exact match first so the bracketed reserved names resolve; everything
  // else lives in the map lowercased.
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) it = ids_.find(lowercase(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0 || ids_.count(lowercase(token)) > 0;
}

const std::string& Vocab::token_of(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("token id " + std::to_string(id));
  return tokens_[static_cast<size_t>(id)];
}

void Vocab::save(const std::string& path) const {
  json j;
  j["format"] = "absa-vocab";
  j["version"] = 1;
  json tok = json::object();
  for (int i = 0; i < size(); ++i) tok[tokens_[static_cast<size_t>(i)]] = i;
  j["tokens"] = tok;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open vocab file for writing: " + path);
  out << j.dump(2) << "\n";
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocab file: " + path);
  json j = json::parse(in);
  if (j.value("format", "") != "absa-vocab" || j.value("version", 0) != 1) {
    throw std::runtime_error("unrecognized vocab file format: " + path);
  }
  std::map<int, std::string> by_id;
  for (auto& [token, id] : j.at("tokens").items()) {
    by_id[id.get<int>()] = token;
  }
  Vocab v;
  int expect = 0;
  for (auto& [id, token] : by_id) {
    if (id != expect++) throw std::runtime_error("vocab ids not dense in " + path);
    if (id <= kSep) {
      if (token != v.token_of(id)) {
        throw std::runtime_error("vocab file " + path + " remaps reserved id " +
                                 std::to_string(id));
      }
      continue;
    }
    v.add(token);
  }
  return v;
}

Vocab build_vocab(const std::vector<LabeledSentence>& sentences,
                  const QueryTemplates& templates, int min_freq) {
  if (min_freq < 1) throw std::invalid_argument("min_freq must be >= 1");
  if (sentences.empty()) throw std::invalid_argument("build_vocab: empty corpus");

  Vocab vocab;
  for (const std::string& t : templates.all_tokens()) vocab.add(lowercase(t));

  std::map<std::string, long> freq;
  for (const LabeledSentence& s : sentences) {
    for (const Token& t : s.tokens.tokens) ++freq[lowercase(t.surface)];
  }
  std::vector<std::pair<std::string, long>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [token, count] : ranked) {
    if (count >= min_freq) vocab.add(token);
  }
  return vocab;
}

EncodedInput encode_pair(const std::vector<std::string>& query,
                         const TokenSeq& context, const Vocab& vocab,
                         int max_len, const std::string& label, int pad_to) {
  int total = 3 + static_cast<int>(query.size()) + context.size();
  if (total > max_len) {
    std::string who = label.empty() ? "input" : "sentence \"" + label + "\"";
    throw std::runtime_error("encode_pair: " + who + " needs " +
                             std::to_string(total) + " positions but max_len is " +
                             std::to_string(max_len));
  }
  if (pad_to > max_len) throw std::runtime_error("encode_pair: pad_to exceeds max_len");

  EncodedInput enc;
  enc.ids.push_back(Vocab::kCls);
  enc.segment_marks.push_back(0);
  for (const std::string& q : query) {
    enc.ids.push_back(vocab.id_of(q));
    enc.segment_marks.push_back(0);
  }
  enc.ids.push_back(Vocab::kSep);
  enc.segment_marks.push_back(0);
  enc.context_offset = static_cast<int>(enc.ids.size());
  enc.context_len = context.size();
  for (const Token& t : context.tokens) {
    enc.ids.push_back(vocab.id_of(t.surface));
    enc.segment_marks.push_back(1);
  }
  enc.ids.push_back(Vocab::kSep);
  enc.segment_marks.push_back(1);
  enc.attention_mask.assign(enc.ids.size(), 1);
  while (pad_to > static_cast<int>(enc.ids.size())) {
    enc.ids.push_back(Vocab::kPad);
    enc.segment_marks.push_back(0);
    enc.attention_mask.push_back(0);
  }
  return enc;
}

}  // namespace absa
