#pragma once

#include <stdexcept>
#include <string>

namespace pcqa {

// Invalid input: bad files, out-of-range parameters, contract violations at
// the API boundary. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// A broken internal invariant, i.e. a bug rather than a user mistake.
// The CLI maps this to exit code 3.
class InternalError : public std::logic_error {
public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace pcqa
