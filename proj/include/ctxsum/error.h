#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctxsum {

// Base for every error raised by the toolkit. Each failure mode named by an
// operation contract has its own subclass so callers and tests can match on
// the type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CTXSUM_DEFINE_ERROR(Name)        \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
    explicit Name() : Error(#Name) {}    \
  }

CTXSUM_DEFINE_ERROR(AllWordsFiltered);
CTXSUM_DEFINE_ERROR(UnknownWord);
CTXSUM_DEFINE_ERROR(DuplicateId);
CTXSUM_DEFINE_ERROR(EmptyCorpus);
CTXSUM_DEFINE_ERROR(DimMismatch);
CTXSUM_DEFINE_ERROR(ShapeMismatch);
CTXSUM_DEFINE_ERROR(BetaNegative);
CTXSUM_DEFINE_ERROR(EmptyDocument);
CTXSUM_DEFINE_ERROR(EmptyBlacklist);
CTXSUM_DEFINE_ERROR(BadProb);
CTXSUM_DEFINE_ERROR(MissingContext);
CTXSUM_DEFINE_ERROR(EmptyTrainingSet);
CTXSUM_DEFINE_ERROR(EmptySentence);
CTXSUM_DEFINE_ERROR(SingleClassData);
CTXSUM_DEFINE_ERROR(FormatError);
CTXSUM_DEFINE_ERROR(DataLeak);

#undef CTXSUM_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t line_no, const std::string& line,
             const std::string& reason)
      : Error("parse error at line " + std::to_string(line_no) + ": " +
              reason + ": " + line),
        line_no_(line_no),
        line_(line) {}

  std::size_t line_no() const { return line_no_; }
  const std::string& line() const { return line_; }

 private:
  std::size_t line_no_;
  std::string line_;
};

}  // namespace ctxsum
