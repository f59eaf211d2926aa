#pragma once

#include <stdexcept>
#include <string>

namespace cema {

/// Input data violates a module contract (bad record, empty table, unknown
/// lemma...). The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed an invalid parameter combination. Exit code 1.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace cema
