#pragma once

#include <stdexcept>
#include <string>

namespace photonic {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Errors caused by bad caller input. The CLI maps these to exit code 2.
class input_error : public error {
public:
    using error::error;
};

class size_limit_error : public input_error {
public:
    using input_error::input_error;
};

class dimension_error : public input_error {
public:
    using input_error::input_error;
};

class shape_error : public input_error {
public:
    using input_error::input_error;
};

class insufficient_data_error : public error {
public:
    using error::error;
};

// Numerical failures (exit code 4).
class numeric_error : public error {
public:
    using error::error;
};

class fit_error : public numeric_error {
public:
    using numeric_error::numeric_error;
};

class optimization_error : public numeric_error {
public:
    using numeric_error::numeric_error;
};

} // namespace photonic
