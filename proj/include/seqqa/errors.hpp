#pragma once

#include <stdexcept>
#include <string>

namespace seqqa {

// All library failures derive from Error so callers (the CLI in particular)
// can map them to a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape_error", what) {}
};

class IndexError : public Error {
 public:
  explicit IndexError(const std::string& what) : Error("index_error", what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format_error", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io_error", what) {}
};

class CorpusError : public Error {
 public:
  explicit CorpusError(const std::string& what) : Error("empty_corpus", what) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error("contract_error", what) {}
};

class CheckpointError : public Error {
 public:
  explicit CheckpointError(const std::string& what) : Error("checkpoint_error", what) {}
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::string last_good_checkpoint = {})
      : Error("divergence", what), last_good_(std::move(last_good_checkpoint)) {}
  const std::string& last_good_checkpoint() const noexcept { return last_good_; }

 private:
  std::string last_good_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error("input_error", what) {}
};

}  // namespace seqqa
