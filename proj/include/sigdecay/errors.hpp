#ifndef SIGDECAY_ERRORS_HPP
#define SIGDECAY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sigdecay {

/// Unusable input: missing/unreadable files, bad config values, violated
/// file-level invariants (duplicate keys, inconsistent geography).
/// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
  public:
    explicit InputError(const std::string &what) : std::runtime_error(what) {}
};

/// A statistically infeasible request, e.g. a regression with fewer
/// observations than parameters. The CLI maps this to exit code 3.
class InfeasibleError : public std::runtime_error {
  public:
    explicit InfeasibleError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace sigdecay

#endif
