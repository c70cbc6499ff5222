#pragma once

#include <stdexcept>
#include <string>

namespace dimlab {

enum class Errc {
  InvalidArgument = 1,
  OutOfDomain,
  NoConvergence,
  NotUnique,
  BudgetExceeded,
  OrbitEscaped,
  Degenerate,
  EmptySelection,
  NoBracket,
  Infeasible,
  HarvestFailed,
  MalformedScheme,
  PadSymbolInvalid,
  TooFewPoints,
  Precondition,
  Parse,
  Io,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace dimlab
