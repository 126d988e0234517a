#include "absa/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "absa/rng.hpp"

namespace absa {

using nlohmann::json;

const char* to_string(Side side) {
  switch (side) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::OpinionOnly: return "opinion_only";
  }
  throw std::logic_error("bad side value");
}

namespace {

Side parse_side(const std::string& s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  if (s == "opinion_only") return Side::OpinionOnly;
  throw std::runtime_error("unknown instance side: \"" + s + "\"");
}

TokenSpan char_field_to_span(const json& field, const char* name,
                             const TokenSeq& tokens) {
  if (!field.is_array() || field.size() != 2 || !field[0].is_number_integer() ||
      !field[1].is_number_integer()) {
    throw std::runtime_error(std::string(name) + " span must be [start,end]");
  }
  return span_chars_to_tokens(field[0].get<int>(), field[1].get<int>(), tokens);
}

void check_one_polarity_per_aspect(const LabeledSentence& s) {
  std::map<TokenSpan, Polarity> seen;
  for (const Triple& t : s.triples) {
    auto [it, inserted] = seen.emplace(t.aspect, t.polarity);
    if (!inserted && it->second != t.polarity) {
      throw std::runtime_error("sentence \"" + s.id + "\": aspect " +
                               to_string(t.aspect) +
                               " annotated with two polarities (" +
                               to_string(it->second) + " vs " +
                               to_string(t.polarity) + ")");
    }
  }
}

}  // namespace

LabeledSentence parse_dataset_record(const std::string& json_line,
                                     const std::string& where) {
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::exception& e) {
    throw std::runtime_error(where + ": invalid JSON: " + e.what());
  }
  try {
    LabeledSentence s;
    s.id = j.at("id").get<std::string>();
    s.text = j.at("text").get<std::string>();
    s.tokens = tokenize(s.text);
    for (const json& jt : j.at("triples")) {
      Triple t;
      t.aspect = char_field_to_span(jt.at("aspect"), "aspect", s.tokens);
      t.opinion = char_field_to_span(jt.at("opinion"), "opinion", s.tokens);
      t.polarity = parse_polarity(jt.at("polarity").get<std::string>());
      if (t.aspect.start >= t.aspect.end || t.opinion.start >= t.opinion.end) {
        throw std::runtime_error("empty aspect or opinion span");
      }
      // Gold triples are a set; drop exact duplicates.
      if (std::find(s.triples.begin(), s.triples.end(), t) == s.triples.end()) {
        s.triples.push_back(t);
      }
    }
    check_one_polarity_per_aspect(s);
    return s;
  } catch (const json::exception& e) {
    throw std::runtime_error(where + ": malformed record: " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(where + ": " + e.what());
  }
}

std::vector<LabeledSentence> load_dataset(const std::string& path,
                                          DatasetFormat format) {
  if (format != DatasetFormat::JsonLines) {
    throw std::runtime_error("unsupported dataset format tag");
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::vector<LabeledSentence> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_dataset_record(line, path + ":" + std::to_string(line_no)));
  }
  return out;
}

void save_dataset(const std::vector<LabeledSentence>& sentences,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  for (const auto& s : sentences) {
    nlohmann::json triples = nlohmann::json::array();
    for (const auto& t : s.triples) {
      const auto chars = [&](const TokenSpan& span) {
        return nlohmann::json::array(
            {s.tokens[span.start].char_start, s.tokens[span.end - 1].char_end});
      };
      triples.push_back({{"aspect", chars(t.aspect)},
                         {"opinion", chars(t.opinion)},
                         {"polarity", to_string(t.polarity)}});
    }
    const nlohmann::json record = {{"id", s.id}, {"text", s.text}, {"triples", triples}};
    out << record.dump() << "\n";
  }
}

std::pair<std::vector<LabeledSentence>, std::vector<LabeledSentence>>
split_train_valid(const std::vector<LabeledSentence>& sentences, double fraction,
                  uint64_t seed) {
  if (sentences.empty()) throw std::runtime_error("split_train_valid: empty input");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::runtime_error("split fraction must lie in (0,1), got " +
                             std::to_string(fraction));
  }
  int n = static_cast<int>(sentences.size());
  int n_valid = static_cast<int>(std::llround(fraction * n));
  std::vector<int> order(sentences.size());
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<char> is_valid(sentences.size(), 0);
  for (int i = 0; i < n_valid; ++i) is_valid[static_cast<size_t>(order[static_cast<size_t>(i)])] = 1;
  std::vector<LabeledSentence> train, valid;
  for (int i = 0; i < n; ++i) {
    (is_valid[static_cast<size_t>(i)] ? valid : train).push_back(sentences[static_cast<size_t>(i)]);
  }
  return {std::move(train), std::move(valid)};
}

MrcDataset convert_to_mrc(const std::vector<LabeledSentence>& sentences,
                          const QueryTemplates& templates, ConversionMode mode) {
  templates.validate();
  MrcDataset ds;
  for (const LabeledSentence& s : sentences) {
    for (const Triple& t : s.triples) {
      if (t.aspect.start < 0 || t.aspect.end > s.tokens.size() ||
          t.opinion.start < 0 || t.opinion.end > s.tokens.size() ||
          t.aspect.start >= t.aspect.end || t.opinion.start >= t.opinion.end) {
        throw std::runtime_error("sentence \"" + s.id + "\": span out of bounds");
      }
    }
    check_one_polarity_per_aspect(s);

    if (mode == ConversionMode::OpinionOnly) {
      MrcInstance inst;
      inst.side = Side::OpinionOnly;
      inst.query = tokenize(templates.opinion_only).surfaces();
      inst.context = s.tokens;
      std::set<TokenSpan> opinions;
      for (const Triple& t : s.triples) opinions.insert(t.opinion);
      inst.answer_spans.assign(opinions.begin(), opinions.end());
      ds.instances.push_back(std::move(inst));
      ds.provenance.push_back({s.id, -1});
      continue;
    }

    // Distinct aspects keyed by span, in first-occurrence order.
    std::vector<TokenSpan> aspects;
    for (const Triple& t : s.triples) {
      if (std::find(aspects.begin(), aspects.end(), t.aspect) == aspects.end()) {
        aspects.push_back(t.aspect);
      }
    }

    std::vector<TokenSpan> aspect_answers = aspects;
    std::sort(aspect_answers.begin(), aspect_answers.end());

    MrcInstance left;
    left.side = Side::Left;
    left.query = tokenize(templates.left).surfaces();
    left.context = s.tokens;
    left.answer_spans = aspect_answers;

    if (aspects.empty()) {
      // Aspect-free sentences stay in as negative left instances so the
      // trained model can return the empty set.
      ds.instances.push_back(left);
      ds.provenance.push_back({s.id, -1});
      continue;
    }

    for (int ai = 0; ai < static_cast<int>(aspects.size()); ++ai) {
      ds.instances.push_back(left);
      ds.provenance.push_back({s.id, ai});
    }
    for (int ai = 0; ai < static_cast<int>(aspects.size()); ++ai) {
      const TokenSpan& aspect = aspects[static_cast<size_t>(ai)];
      MrcInstance right;
      right.side = Side::Right;
      right.query =
          tokenize(templates.make_right_query(s.tokens.join(aspect))).surfaces();
      right.context = s.tokens;
      std::set<TokenSpan> opinions;
      std::optional<Polarity> polarity;
      for (const Triple& t : s.triples) {
        if (t.aspect == aspect) {
          opinions.insert(t.opinion);
          polarity = t.polarity;
        }
      }
      right.answer_spans.assign(opinions.begin(), opinions.end());
      right.polarity_label = polarity;
      right.given_aspect = aspect;
      ds.instances.push_back(std::move(right));
      ds.provenance.push_back({s.id, ai});
    }
  }
  return ds;
}

namespace {

json token_seq_to_json(const TokenSeq& seq) {
  json arr = json::array();
  for (const Token& t : seq.tokens) {
    arr.push_back(json::array({t.surface, t.char_start, t.char_end}));
  }
  return arr;
}

TokenSeq token_seq_from_json(const json& arr) {
  TokenSeq seq;
  for (const json& jt : arr) {
    seq.tokens.push_back(
        Token{jt.at(0).get<std::string>(), jt.at(1).get<int>(), jt.at(2).get<int>()});
  }
  return seq;
}

json span_to_json(const TokenSpan& s) { return json::array({s.start, s.end}); }

TokenSpan span_from_json(const json& j) {
  return TokenSpan{j.at(0).get<int>(), j.at(1).get<int>()};
}

}  // namespace

void save_mrc_dataset(const MrcDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  json header{{"format", "absa-mrc-dataset"}, {"version", 1},
              {"count", dataset.size()}};
  out << header.dump() << "\n";
  for (int i = 0; i < dataset.size(); ++i) {
    const MrcInstance& inst = dataset.instances[static_cast<size_t>(i)];
    const MrcDataset::Provenance& prov = dataset.provenance[static_cast<size_t>(i)];
    json j;
    j["side"] = to_string(inst.side);
    j["sentence_id"] = prov.sentence_id;
    j["aspect_index"] = prov.aspect_index;
    j["query"] = inst.query;
    j["context"] = token_seq_to_json(inst.context);
    json answers = json::array();
    for (const TokenSpan& s : inst.answer_spans) answers.push_back(span_to_json(s));
    j["answers"] = answers;
    if (inst.polarity_label) j["polarity"] = to_string(*inst.polarity_label);
    if (inst.given_aspect) j["given_aspect"] = span_to_json(*inst.given_aspect);
    out << j.dump() << "\n";
  }
}

MrcDataset load_mrc_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
  json header = json::parse(line);
  if (header.value("format", "") != "absa-mrc-dataset" || header.value("version", 0) != 1) {
    throw std::runtime_error("unrecognized converted-dataset format: " + path);
  }
  MrcDataset ds;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      MrcInstance inst;
      inst.side = parse_side(j.at("side").get<std::string>());
      inst.query = j.at("query").get<std::vector<std::string>>();
      inst.context = token_seq_from_json(j.at("context"));
      for (const json& ja : j.at("answers")) inst.answer_spans.push_back(span_from_json(ja));
      if (j.contains("polarity")) inst.polarity_label = parse_polarity(j["polarity"].get<std::string>());
      if (j.contains("given_aspect")) inst.given_aspect = span_from_json(j["given_aspect"]);
      ds.instances.push_back(std::move(inst));
      ds.provenance.push_back(
          {j.at("sentence_id").get<std::string>(), j.at("aspect_index").get<int>()});
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed instance: " + e.what());
    }
  }
  if (ds.size() != header.value("count", -1)) {
    throw std::runtime_error(path + ": instance count does not match header");
  }
  return ds;
}

}  // namespace absa
