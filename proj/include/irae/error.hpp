#pragma once

#include <stdexcept>
#include <string>

namespace irae {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

// Raised when a 1x1 convolution weight is too close to singular to invert.
class SingularWeightError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace irae
