#pragma once

#include <stdexcept>
#include <string>

namespace cocycle {

// Malformed input: rank mismatch, non-laminar class, relation that is not an
// equivalence relation.
class StructuralError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Argument outside the operation's domain (n < 1, tail agreement violated...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A boundary prefix is too short for the requested operation. Callers should
// resample at greater depth rather than truncate.
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Enumeration or exact evaluation would exceed a configured cap.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cocycle
