#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvsde {

enum class ErrorKind {
    domain,
    config,
    model,
    blow_up,
    non_convergence,
    precondition,
};

// Base of every error the library raises. The kind drives the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class ModelError : public Error {
public:
    explicit ModelError(const std::string& what) : Error(ErrorKind::model, what) {}
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

class NonConvergenceError : public Error {
public:
    explicit NonConvergenceError(const std::string& what) : Error(ErrorKind::non_convergence, what) {}
};

// Configuration problems carry the dotted key that caused them.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(ErrorKind::config, key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class BlowUpError : public Error {
public:
    BlowUpError(std::size_t particle, std::size_t step)
        : Error(ErrorKind::blow_up, "non-finite state for particle " + std::to_string(particle) +
                                        " at step " + std::to_string(step)),
          particle_(particle), step_(step) {}

    [[nodiscard]] std::size_t particle() const noexcept { return particle_; }
    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t particle_;
    std::size_t step_;
};

}  // namespace mvsde
