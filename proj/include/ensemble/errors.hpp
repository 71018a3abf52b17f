#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ens {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDensity : public Error {
public:
    using Error::Error;
};

// p hit zero (or |psi|^2 fell to the floor) at a grid point.
class NodeError : public Error {
public:
    NodeError(const std::string& what, std::size_t index)
        : Error(what), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class UnsupportedConfiguration : public Error {
public:
    using Error::Error;
};

class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, std::size_t step)
        : Error(what), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

} // namespace ens
