#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absa/tokenizer.hpp"
#include "absa/types.hpp"

namespace absa {

/// One (aspect, opinion, polarity) annotation, spans in token indices.
struct Triple {
  TokenSpan aspect;
  TokenSpan opinion;
  Polarity polarity = Polarity::Positive;

  auto operator<=>(const Triple&) const = default;
};

/// A tokenized sentence with its gold triple set.
struct LabeledSentence {
  std::string id;
  std::string text;
  TokenSeq tokens;
  std::vector<Triple> triples;
};

enum class Side { Left, Right, OpinionOnly };

const char* to_string(Side side);

/// One converted MRC training unit.
///  Left: query asks for all aspects, answers = every aspect span.
///  Right: query names one aspect, answers = its opinion spans, plus the
///         polarity label and the aspect span the query was built from.
///  OpinionOnly: the optional standalone opinion-extraction flavor.
struct MrcInstance {
  Side side = Side::Left;
  std::vector<std::string> query;
  TokenSeq context;
  std::vector<TokenSpan> answer_spans;        // context-relative
  std::optional<Polarity> polarity_label;     // Right only
  std::optional<TokenSpan> given_aspect;      // Right only
};

struct MrcDataset {
  struct Provenance {
    std::string sentence_id;
    int aspect_index = 0;  // -1 for instances not tied to an aspect
  };

  std::vector<MrcInstance> instances;
  std::vector<Provenance> provenance;  // parallel to instances

  int size() const { return static_cast<int>(instances.size()); }
};

enum class DatasetFormat { JsonLines };

/// Reads a UTF-8 JSON-lines dataset file: one object per line with fields
/// id / text / triples, char-offset spans. Char spans are aligned to token
/// spans here; any malformed record fails with its line number.
std::vector<LabeledSentence> load_dataset(const std::string& path,
                                          DatasetFormat format = DatasetFormat::JsonLines);

/// Parses one dataset record (exposed for tests; `where` names the source
/// position in errors).
LabeledSentence parse_dataset_record(const std::string& json_line,
                                     const std::string& where);

/// Writes sentences back to the JSON-lines format, spans as char offsets.
void save_dataset(const std::vector<LabeledSentence>& sentences,
                  const std::string& path);

/// Seeded random split; |valid| = round(fraction * N). Both parts keep the
/// original relative order.
std::pair<std::vector<LabeledSentence>, std::vector<LabeledSentence>>
split_train_valid(const std::vector<LabeledSentence>& sentences, double fraction,
                  uint64_t seed);

enum class ConversionMode {
  DualMrc,      // k Left copies + k Right instances per sentence
  OpinionOnly,  // one instance per sentence, answers = all opinion spans
};

/// Converts gold sentences to MRC instances. In DualMrc mode each sentence
/// contributes one Left copy and one Right instance per distinct aspect
/// span (aspect-free sentences keep a single negative Left instance).
MrcDataset convert_to_mrc(const std::vector<LabeledSentence>& sentences,
                          const QueryTemplates& templates,
                          ConversionMode mode = ConversionMode::DualMrc);

void save_mrc_dataset(const MrcDataset& dataset, const std::string& path);
MrcDataset load_mrc_dataset(const std::string& path);

}  // namespace absa
