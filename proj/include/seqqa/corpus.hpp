#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace seqqa {

using TokenId = std::uint32_t;
using Tokens = std::vector<std::string>;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kGo = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kNumSpecials = 4;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kGoToken = "<go>";
inline constexpr std::string_view kEosToken = "<eos>";
inline constexpr std::string_view kUnkToken = "<unk>";

struct QAPair {
  Tokens question;
  Tokens answer;
  friend bool operator==(const QAPair&, const QAPair&) = default;
};

struct ParseResult {
  std::vector<QAPair> pairs;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Tokenization

/// Lowercases, splits on whitespace, then splits every punctuation character
/// into its own token. `_` and apostrophes between two word characters stay
/// inside the word. Bytes >= 0x80 count as word characters so UTF-8 survives.
Tokens tokenize(std::string_view text);

/// Phrases stored as token sequences, longest match wins.
class TermLexicon {
 public:
  TermLexicon() = default;
  explicit TermLexicon(const std::vector<std::string>& phrases);

  /// One phrase per line; blank lines and lines with a single token are skipped.
  static TermLexicon read(std::istream& in);
  static TermLexicon read_file(const std::filesystem::path& path);

  bool empty() const noexcept { return phrases_.empty(); }
  std::size_t size() const noexcept { return phrases_.size(); }
  std::size_t longest() const noexcept { return longest_; }
  bool contains(const Tokens& phrase) const { return phrases_.count(phrase) != 0; }

 private:
  std::set<Tokens> phrases_;
  std::size_t longest_ = 0;
};

/// Replaces lexicon phrases by their underscore-joined form in a single
/// left-to-right, longest-match-first, non-overlapping pass.
Tokens merge_terms(const Tokens& tokens, const TermLexicon& lexicon);

// ---------------------------------------------------------------------------
// Corpus readers

inline constexpr std::string_view kCornellSeparator = " +++$+++ ";

ParseResult parse_cornell(std::istream& lines, std::istream& conversations);
ParseResult parse_cornell_files(const std::filesystem::path& lines, const std::filesystem::path& conversations);

ParseResult parse_tsv(std::istream& in);
ParseResult parse_tsv_file(const std::filesystem::path& path);

/// Writes `question<TAB>answer` with tokens space-joined.
void write_tsv(std::ostream& out, const std::vector<QAPair>& pairs);

// ---------------------------------------------------------------------------
// Vocabulary

class Vocabulary {
 public:
  /// The four specials only.
  Vocabulary();
  /// `tokens` must start with the four specials in order and be distinct.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// Misses resolve to `<unk>`.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;

  std::vector<TokenId> ids(const Tokens& tokens) const;

  void write(std::ostream& out) const;
  void write_file(const std::filesystem::path& path) const;
  static Vocabulary read(std::istream& in);
  static Vocabulary read_file(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Keeps tokens seen at least `min_count` times, most frequent first with
/// lexicographic tie-break, truncated so the total (with specials) is at
/// most `max_size`.
Vocabulary build_vocab(const std::vector<QAPair>& pairs, std::size_t min_count, std::size_t max_size);

// ---------------------------------------------------------------------------
// Encoding and batching

struct EncodedExample {
  std::vector<TokenId> source;
  std::vector<TokenId> decoder_input;   // <go> + answer
  std::vector<TokenId> decoder_target;  // answer + <eos>
  std::vector<std::uint8_t> mask;
  friend bool operator==(const EncodedExample&, const EncodedExample&) = default;
};

struct Rejection {
  std::string reason;
};

using EncodeResult = std::variant<EncodedExample, Rejection>;

EncodeResult encode_example(const QAPair& pair, const Vocabulary& vocab, std::size_t max_len);

struct EncodedCorpus {
  std::vector<EncodedExample> examples;
  std::size_t rejected = 0;
};

EncodedCorpus encode_corpus(const std::vector<QAPair>& pairs, const Vocabulary& vocab, std::size_t max_len);

struct Batch {
  std::vector<EncodedExample> examples;     // padded in place with <pad>=0, mask 0
  std::vector<std::size_t> source_lengths;  // before padding
  std::vector<std::size_t> origin;          // index of each row in the input list

  std::size_t size() const noexcept { return examples.size(); }
};

/// Optional seeded Fisher-Yates shuffle, then consecutive chunks of
/// `batch_size` padded to the longest source/target in the chunk.
std::vector<Batch> make_batches(const std::vector<EncodedExample>& examples, std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed);

// ---------------------------------------------------------------------------
// Pretrained vectors

struct PretrainedEmbeddings {
  std::map<TokenId, std::vector<double>> rows;
  std::size_t coverage = 0;
  std::size_t dim = 0;
};

/// Reads `token v1 ... vD` lines and keeps the rows of tokens present in
/// `vocab`. Every line must carry exactly `dim` values.
PretrainedEmbeddings load_pretrained_embeddings(std::istream& in, const Vocabulary& vocab, std::size_t dim);
PretrainedEmbeddings load_pretrained_embeddings_file(const std::filesystem::path& path, const Vocabulary& vocab,
                                                     std::size_t dim);

// ---------------------------------------------------------------------------
// Synthetic data

/// Echo pairs (answer == question) over `content_tokens` words `w0..wN`,
/// lengths uniform in [1, max_len].
std::vector<QAPair> make_copy_task(std::size_t num_pairs, std::size_t content_tokens, std::size_t max_len,
                                   std::uint64_t seed);

}  // namespace seqqa
