#include <doctest.h>

#include <cstring>
#include <fstream>

#include "seqqa/checkpoint.hpp"
#include "support.hpp"

using namespace seqqa;

namespace {

std::vector<char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string load_error(const std::filesystem::path& path) {
  try {
    load_checkpoint(path);
  } catch (const CheckpointError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("checkpoint round trip is bitwise") {
  const auto vocab = test::small_vocab();
  const auto params = init_params<float>(Hyper{vocab.size(), 5, 4, 2}, 31);
  test::TempDir dir;
  save_checkpoint(dir / "m.sqac", params, vocab);
  const auto loaded = load_checkpoint(dir / "m.sqac");
  CHECK(loaded.vocab == vocab);
  CHECK(loaded.hyper() == params.hyper);
  auto a = params.named_tensors();
  auto b = loaded.params.named_tensors();
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].first == b[k].first);
    CHECK(a[k].second->shape() == b[k].second->shape());
    CHECK(std::memcmp(a[k].second->data().data(), b[k].second->data().data(), a[k].second->size() * sizeof(float)) ==
          0);
  }
  CHECK(params_checksum(loaded.params) == params_checksum(params));
  CHECK_FALSE(std::filesystem::exists(dir / "m.sqac.tmp"));
}

TEST_CASE("checkpoint layout starts with magic, version and header length") {
  const auto vocab = test::small_vocab();
  const auto bytes = serialize_checkpoint(init_params<float>(Hyper{vocab.size(), 2, 2, 1}, 1), vocab);
  REQUIRE(bytes.size() > 16);
  CHECK(std::string(bytes.data(), 4) == "SQAC");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);
  CHECK(bytes[5] == 0);
  std::uint64_t header_len = 0;
  for (int k = 7; k >= 0; --k) header_len = header_len << 8 | static_cast<unsigned char>(bytes[8 + k]);
  CHECK(bytes[16] == '{');
  CHECK(bytes[16 + header_len - 1] == '}');
  const auto params = ModelParams<float>::zeros(Hyper{vocab.size(), 2, 2, 1});
  CHECK(bytes.size() == 16 + header_len + params.parameter_count() * sizeof(float));
}

TEST_CASE("checkpoint rejects bad magic, version and truncation") {
  const auto vocab = test::small_vocab();
  test::TempDir dir;
  save_checkpoint(dir / "m.sqac", init_params<float>(Hyper{vocab.size(), 3, 3, 2}, 2), vocab);
  const auto good = read_bytes(dir / "m.sqac");

  auto magic = good;
  magic[0] = 'X';
  write_bytes(dir / "magic.sqac", magic);
  CHECK(load_error(dir / "magic.sqac") == "not a checkpoint");

  auto version = good;
  version[4] = 2;
  write_bytes(dir / "version.sqac", version);
  CHECK(load_error(dir / "version.sqac").starts_with("unsupported version"));

  auto truncated = good;
  truncated.resize(good.size() - 7);
  write_bytes(dir / "short.sqac", truncated);
  CHECK(load_error(dir / "short.sqac").starts_with("corrupt checkpoint"));

  auto extended = good;
  extended.push_back(0);
  write_bytes(dir / "long.sqac", extended);
  CHECK(load_error(dir / "long.sqac").starts_with("corrupt checkpoint"));

  write_bytes(dir / "tiny.sqac", std::vector<char>{'S', 'Q'});
  CHECK(load_error(dir / "tiny.sqac") == "not a checkpoint");

  CHECK_THROWS_AS(load_checkpoint(dir / "missing.sqac"), IoError);
}

TEST_CASE("saving with a mismatched vocabulary is refused") {
  const auto vocab = test::small_vocab();
  const auto params = ModelParams<float>::zeros(Hyper{vocab.size() + 1, 2, 2, 1});
  CHECK_THROWS_AS(serialize_checkpoint(params, vocab), ContractError);
}
