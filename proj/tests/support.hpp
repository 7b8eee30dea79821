#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "seqqa/corpus.hpp"
#include "seqqa/random.hpp"
#include "seqqa/seq2seq.hpp"

namespace seqqa::test {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(SEQQA_FIXTURES) / name; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("seqqa-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

template <typename T>
ModelParams<T> random_params(const Hyper& hyper, std::uint64_t seed, double scale = 0.5) {
  Rng rng(seed);
  auto p = ModelParams<T>::zeros(hyper);
  for (auto& [name, t] : p.named_tensors()) {
    for (auto& v : t->data()) v = static_cast<T>(rng.uniform(-scale, scale));
  }
  return p;
}

inline Vocabulary small_vocab() { return Vocabulary({"<pad>", "<go>", "<eos>", "<unk>", "hi", "hello", "there"}); }

inline EncodedExample encoded(const QAPair& pair, const Vocabulary& vocab, std::size_t max_len = 10) {
  return std::get<EncodedExample>(encode_example(pair, vocab, max_len));
}

}  // namespace seqqa::test
