#include "seqqa/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "seqqa/errors.hpp"
#include "seqqa/random.hpp"

namespace seqqa {

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_word_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

char to_lower(unsigned char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c); }

std::string_view strip_eol(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  return line;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + sep.size();
  }
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string join(const Tokens& tokens, char sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

// Parses "['L1', 'L2']" into its ids; empty optional when malformed.
std::optional<std::vector<std::string>> parse_id_list(std::string_view field) {
  field = trim(field);
  if (field.size() < 2 || field.front() != '[' || field.back() != ']') return std::nullopt;
  field = trim(field.substr(1, field.size() - 2));
  std::vector<std::string> ids;
  if (field.empty()) return ids;
  for (auto item : split(field, ",")) {
    item = trim(item);
    if (item.size() < 3) return std::nullopt;
    const char q = item.front();
    if ((q != '\'' && q != '"') || item.back() != q) return std::nullopt;
    ids.emplace_back(item.substr(1, item.size() - 2));
  }
  return ids;
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  for (auto chunk : split_whitespace(text)) {
    std::string word;
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const auto c = static_cast<unsigned char>(chunk[i]);
      const bool intra_apostrophe = c == '\'' && !word.empty() && i + 1 < chunk.size() &&
                                    is_word_char(static_cast<unsigned char>(chunk[i + 1]));
      if (is_word_char(c) || intra_apostrophe) {
        word += to_lower(c);
        continue;
      }
      if (!word.empty()) out.push_back(std::move(word));
      word.clear();
      out.emplace_back(1, static_cast<char>(c));
    }
    if (!word.empty()) out.push_back(std::move(word));
  }
  return out;
}

TermLexicon::TermLexicon(const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) {
    Tokens words;
    for (auto w : split_whitespace(p)) {
      std::string lw(w);
      for (auto& ch : lw) ch = to_lower(static_cast<unsigned char>(ch));
      words.push_back(std::move(lw));
    }
    if (words.size() < 2) continue;
    longest_ = std::max(longest_, words.size());
    phrases_.insert(std::move(words));
  }
}

TermLexicon TermLexicon::read(std::istream& in) {
  std::vector<std::string> phrases;
  std::string line;
  while (std::getline(in, line)) phrases.emplace_back(strip_eol(line));
  return TermLexicon(phrases);
}

TermLexicon TermLexicon::read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read(in);
}

Tokens merge_terms(const Tokens& tokens, const TermLexicon& lexicon) {
  if (lexicon.empty()) return tokens;
  Tokens out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t matched = 0;
    const std::size_t max_len = std::min(lexicon.longest(), tokens.size() - i);
    for (std::size_t len = max_len; len >= 2; --len) {
      const Tokens candidate(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                             tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
      if (lexicon.contains(candidate)) {
        matched = len;
        out.push_back(join(candidate, '_'));
        break;
      }
    }
    if (matched) {
      i += matched;
    } else {
      out.push_back(tokens[i++]);
    }
  }
  return out;
}

ParseResult parse_cornell(std::istream& lines, std::istream& conversations) {
  ParseResult result;
  std::unordered_map<std::string, Tokens> utterances;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    std::string_view view = strip_eol(line);
    if (trim(view).empty()) continue;
    std::string padded;
    if (view.ends_with(" +++$+++")) {  // empty text with trailing space trimmed
      padded = std::string(view) + " ";
      view = padded;
    }
    const auto fields = split(view, kCornellSeparator);
    if (fields.size() != 5) {
      result.warnings.push_back("lines:" + std::to_string(line_no) + ": expected 5 fields, got " +
                                std::to_string(fields.size()));
      continue;
    }
    utterances[std::string(trim(fields[0]))] = tokenize(fields[4]);
  }

  line_no = 0;
  while (std::getline(conversations, line)) {
    ++line_no;
    const std::string_view view = strip_eol(line);
    if (trim(view).empty()) continue;
    const auto fields = split(view, kCornellSeparator);
    const auto ids = fields.size() == 4 ? parse_id_list(fields[3]) : std::nullopt;
    if (!ids) {
      result.warnings.push_back("conversations:" + std::to_string(line_no) + ": malformed conversation record");
      continue;
    }
    std::vector<const Tokens*> turns;
    for (const auto& id : *ids) {
      auto it = utterances.find(id);
      if (it == utterances.end()) {
        result.warnings.push_back("conversations:" + std::to_string(line_no) + ": unknown line id " + id);
        turns.push_back(nullptr);
      } else {
        turns.push_back(&it->second);
      }
    }
    for (std::size_t k = 0; k + 1 < turns.size(); ++k) {
      if (!turns[k] || !turns[k + 1]) continue;
      if (turns[k]->empty() || turns[k + 1]->empty()) {
        result.warnings.push_back("conversations:" + std::to_string(line_no) + ": empty utterance in pair " +
                                  (*ids)[k] + " -> " + (*ids)[k + 1]);
        continue;
      }
      result.pairs.push_back({*turns[k], *turns[k + 1]});
    }
  }
  if (result.pairs.empty()) throw CorpusError("no question/answer pairs parsed from Cornell input");
  return result;
}

ParseResult parse_cornell_files(const std::filesystem::path& lines, const std::filesystem::path& conversations) {
  auto l = open_input(lines);
  auto c = open_input(conversations);
  return parse_cornell(l, c);
}

ParseResult parse_tsv(std::istream& in) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = strip_eol(line);
    if (view.empty()) continue;
    const auto tab = view.find('\t');
    if (tab == std::string_view::npos) {
      result.warnings.push_back("line " + std::to_string(line_no) + ": no tab separator");
      continue;
    }
    QAPair pair{tokenize(view.substr(0, tab)), tokenize(view.substr(tab + 1))};
    if (pair.question.empty() || pair.answer.empty()) {
      result.warnings.push_back("line " + std::to_string(line_no) + ": empty " +
                                (pair.question.empty() ? "question" : "answer"));
      continue;
    }
    result.pairs.push_back(std::move(pair));
  }
  if (result.pairs.empty()) throw CorpusError("no question/answer pairs parsed from TSV input");
  return result;
}

ParseResult parse_tsv_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_tsv(in);
}

void write_tsv(std::ostream& out, const std::vector<QAPair>& pairs) {
  for (const auto& p : pairs) out << join(p.question, ' ') << '\t' << join(p.answer, ' ') << '\n';
}

Vocabulary::Vocabulary()
    : Vocabulary(std::vector<std::string>{std::string(kPadToken), std::string(kGoToken), std::string(kEosToken),
                                          std::string(kUnkToken)}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  const std::string_view specials[] = {kPadToken, kGoToken, kEosToken, kUnkToken};
  if (tokens_.size() < kNumSpecials) throw FormatError("vocabulary must start with the 4 special tokens");
  for (std::size_t i = 0; i < kNumSpecials; ++i) {
    if (tokens_[i] != specials[i]) {
      throw FormatError("vocabulary id " + std::to_string(i) + " must be " + std::string(specials[i]) + ", got " +
                        tokens_[i]);
    }
  }
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw FormatError("empty token at vocabulary id " + std::to_string(i));
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw FormatError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw IndexError("token id " + std::to_string(id) + " out of range for vocabulary of " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::vector<TokenId> Vocabulary::ids(const Tokens& tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

void Vocabulary::write(std::ostream& out) const {
  for (const auto& t : tokens_) out << t << '\n';
}

void Vocabulary::write_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write(out);
}

Vocabulary Vocabulary::read(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto view = strip_eol(line);
    if (view.empty()) continue;
    tokens.emplace_back(view);
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read(in);
}

Vocabulary build_vocab(const std::vector<QAPair>& pairs, std::size_t min_count, std::size_t max_size) {
  if (min_count < 1) throw ContractError("min_count must be >= 1");
  if (max_size < kNumSpecials) throw ContractError("max_size must be >= 4");
  Vocabulary specials;
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& p : pairs) {
    for (const auto* side : {&p.question, &p.answer}) {
      for (const auto& t : *side) {
        if (!specials.contains(t)) ++counts[t];
      }
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts) {
    if (n >= min_count) ranked.emplace_back(tok, n);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> tokens = specials.tokens();
  for (auto& [tok, n] : ranked) {
    if (tokens.size() >= max_size) break;
    tokens.push_back(std::move(tok));
  }
  return Vocabulary(std::move(tokens));
}

EncodeResult encode_example(const QAPair& pair, const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 1) throw ContractError("max_len must be >= 1");
  if (pair.question.empty()) return Rejection{"empty source"};
  if (pair.answer.empty()) return Rejection{"empty target"};
  if (pair.question.size() > max_len) return Rejection{"source too long"};
  if (pair.answer.size() > max_len) return Rejection{"target too long"};

  EncodedExample ex;
  ex.source = vocab.ids(pair.question);
  const auto answer = vocab.ids(pair.answer);
  ex.decoder_input.push_back(kGo);
  ex.decoder_input.insert(ex.decoder_input.end(), answer.begin(), answer.end());
  ex.decoder_target = answer;
  ex.decoder_target.push_back(kEos);
  ex.mask.assign(ex.decoder_target.size(), 1);
  return ex;
}

EncodedCorpus encode_corpus(const std::vector<QAPair>& pairs, const Vocabulary& vocab, std::size_t max_len) {
  EncodedCorpus out;
  for (const auto& p : pairs) {
    auto r = encode_example(p, vocab, max_len);
    if (auto* ex = std::get_if<EncodedExample>(&r)) {
      out.examples.push_back(std::move(*ex));
    } else {
      ++out.rejected;
    }
  }
  return out;
}

std::vector<Batch> make_batches(const std::vector<EncodedExample>& examples, std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed) {
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
  if (examples.empty()) throw CorpusError("cannot batch an empty example list");

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    rng.shuffle(order);
  }

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    Batch b;
    std::size_t src_len = 0, tgt_len = 0;
    for (std::size_t k = start; k < end; ++k) {
      const auto& ex = examples[order[k]];
      src_len = std::max(src_len, ex.source.size());
      tgt_len = std::max(tgt_len, ex.decoder_target.size());
    }
    for (std::size_t k = start; k < end; ++k) {
      EncodedExample ex = examples[order[k]];
      b.source_lengths.push_back(ex.source.size());
      b.origin.push_back(order[k]);
      ex.source.resize(src_len, kPad);
      ex.decoder_input.resize(tgt_len, kPad);
      ex.decoder_target.resize(tgt_len, kPad);
      ex.mask.resize(tgt_len, 0);
      b.examples.push_back(std::move(ex));
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

PretrainedEmbeddings load_pretrained_embeddings(std::istream& in, const Vocabulary& vocab, std::size_t dim) {
  PretrainedEmbeddings out;
  out.dim = dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(strip_eol(line));
    if (fields.empty()) continue;
    // word2vec text files open with a "count dim" header.
    if (line_no == 1 && fields.size() == 2 && dim != 1 && fields[0].find_first_not_of("0123456789") == std::string_view::npos &&
        fields[1] == std::to_string(dim)) {
      continue;
    }
    if (fields.size() != dim + 1) {
      throw FormatError("pretrained vectors line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                        " values, got " + std::to_string(fields.size() - 1));
    }
    std::vector<double> row(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const auto f = fields[j + 1];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[j]);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw FormatError("pretrained vectors line " + std::to_string(line_no) + ": bad number '" + std::string(f) +
                          "'");
      }
    }
    const std::string token(fields[0]);
    if (!vocab.contains(token)) continue;
    if (out.rows.emplace(vocab.id(token), std::move(row)).second) ++out.coverage;
  }
  return out;
}

PretrainedEmbeddings load_pretrained_embeddings_file(const std::filesystem::path& path, const Vocabulary& vocab,
                                                     std::size_t dim) {
  auto in = open_input(path);
  return load_pretrained_embeddings(in, vocab, dim);
}

std::vector<QAPair> make_copy_task(std::size_t num_pairs, std::size_t content_tokens, std::size_t max_len,
                                   std::uint64_t seed) {
  if (content_tokens < 1 || max_len < 1) throw ContractError("copy task needs at least one token and length 1");
  Rng rng(seed);
  std::vector<QAPair> pairs;
  pairs.reserve(num_pairs);
  for (std::size_t n = 0; n < num_pairs; ++n) {
    const std::size_t len = 1 + rng.below(max_len);
    Tokens seq;
    for (std::size_t k = 0; k < len; ++k) seq.push_back("w" + std::to_string(rng.below(content_tokens)));
    pairs.push_back({seq, seq});
  }
  return pairs;
}

}  // namespace seqqa
