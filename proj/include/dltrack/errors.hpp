#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dltrack {

// Base for every error raised by the library. Callers that only need to
// distinguish "our" failures from std ones can catch this.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class invalid_bounds : public error {
public:
    using error::error;
};

// Malformed or out-of-range input data. Carries the offending row (0-based
// measurement index, or file line when raised by the CSV reader).
class data_error : public error {
public:
    data_error(const std::string& what, std::size_t index)
        : error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class unsupported_hypothesis : public error {
public:
    using error::error;
};

class invalid_covariance : public error {
public:
    using error::error;
};

class degenerate_likelihood : public error {
public:
    using error::error;
};

class degenerate_geometry : public error {
public:
    using error::error;
};

class empty_support : public error {
public:
    using error::error;
};

class size_limit : public error {
public:
    using error::error;
};

class config_error : public error {
public:
    using error::error;
};

class io_error : public error {
public:
    using error::error;
};

class oracle_failure : public error {
public:
    using error::error;
};

}  // namespace dltrack
