#pragma once

#include <stdexcept>
#include <string>

namespace tinytok {

// Raised for problems the user can fix: missing or malformed input files,
// invalid flag combinations, violated preconditions.  The CLI reports these
// on stderr and exits with status 1.  Anything else escaping to main()
// (std::logic_error, std::bad_alloc, ...) is an internal failure -> status 2.
class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tinytok
