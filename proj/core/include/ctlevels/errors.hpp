#pragma once

#include <stdexcept>
#include <string>

namespace ctlevels {

// Malformed input: bad CSV headers, unknown/missing columns, out-of-range
// cells, unreadable model documents. CLI maps these to exit code 2.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem problems; the message carries the offending path. Exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerically infeasible requests: fewer rows than clusters, splits of a
// single row, folds too small. CLI maps these to exit code 3.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ctlevels
