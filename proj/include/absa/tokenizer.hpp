#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "absa/types.hpp"

namespace absa {

struct LabeledSentence;  // corpus.hpp

/// One token with its half-open character extent into the source text.
/// The surface is the exact source substring; case normalization happens
/// at vocabulary lookup, not here, so offsets always detokenize faithfully.
struct Token {
  std::string surface;
  int char_start = 0;
  int char_end = 0;
};

struct TokenSeq {
  std::vector<Token> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
  bool empty() const { return tokens.empty(); }
  const Token& operator[](int i) const { return tokens[static_cast<size_t>(i)]; }

  /// Surfaces of [span.start, span.end) joined with single spaces.
  std::string join(const TokenSpan& span) const;
  std::vector<std::string> surfaces() const;
};

/// Whitespace-delimited tokenization with faithful char offsets.
/// Empty text yields an empty sequence.
TokenSeq tokenize(const std::string& text);

/// Maps an exact character span onto the minimal covering token interval.
/// Throws if either boundary falls strictly inside a token; the message
/// names the offending token.
TokenSpan span_chars_to_tokens(int char_start, int char_end, const TokenSeq& seq);

/// The three MRC query strings. The right template carries exactly one
/// "{}" placeholder for the aspect surface text.
struct QueryTemplates {
  std::string left = "Find the aspect terms in the text.";
  std::string right = "Find the sentiment polarity and opinion terms for {} in the text.";
  std::string opinion_only = "Find the opinion terms in the text.";

  void validate() const;
  std::string make_right_query(const std::string& aspect_text) const;
  /// Template tokens that must always be in the vocabulary (placeholder
  /// stripped from the right template).
  std::vector<std::string> all_tokens() const;
};

/// Token-to-id map with fixed reserved ids. Lookup lowercases, so the
/// vocabulary stores lowercase keys only.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;

  Vocab();

  int id_of(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token_of(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  /// Insertion used by build_vocab and the loader; no-op on duplicates.
  int add(const std::string& lowercase_token);

  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

 private:
  std::map<std::string, int> ids_;
  std::vector<std::string> tokens_;
};

std::string lowercase(std::string_view s);

/// Builds a vocabulary over the corpus plus all template tokens.
/// Corpus tokens need frequency >= min_freq; template tokens are always
/// kept. Id assignment is a pure function of the inputs: reserved ids,
/// template tokens in template order, then corpus tokens by descending
/// frequency with lexicographic tie-break.
Vocab build_vocab(const std::vector<LabeledSentence>& sentences,
                  const QueryTemplates& templates, int min_freq);

/// [CLS] query [SEP] context [SEP] layout over vocabulary ids.
struct EncodedInput {
  std::vector<int> ids;
  std::vector<int> segment_marks;        // 0 = query half, 1 = context half
  std::vector<uint8_t> attention_mask;   // 1 = real token, 0 = padding
  int context_offset = 0;                // sequence position of context token 0
  int context_len = 0;

  int seq_len() const { return static_cast<int>(ids.size()); }
  /// Sequence position of context-relative token index i.
  int context_pos(int i) const { return context_offset + i; }
};

/// Assembles the model input. Rejects over-length input instead of
/// truncating; `label` names the offending sentence in the error.
/// pad_to > 0 right-pads with [PAD] up to that length.
EncodedInput encode_pair(const std::vector<std::string>& query,
                         const TokenSeq& context, const Vocab& vocab,
                         int max_len, const std::string& label = {},
                         int pad_to = 0);

}  // namespace absa
