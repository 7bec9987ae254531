#pragma once

#include <stdexcept>
#include <string>

namespace bnsfuzzy {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A mathematical precondition was violated (alpha outside [0,1], s > T, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or hyperparameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data is missing, malformed or insufficient.
class DataError : public Error {
public:
    using Error::Error;
};

/// A required CSV column is absent.
class SchemaError : public DataError {
public:
    using DataError::DataError;
};

/// Training data carries only one class where two are required.
class DegenerateDataError : public DataError {
public:
    using DataError::DataError;
};

/// A train/test split left one side empty.
class SplitError : public DataError {
public:
    using DataError::DataError;
};

/// Matrix or vector dimensions disagree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or unstable discretization.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Euler step would drive the variance negative through decay alone.
class StabilityError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Runs `fn`; a library error escaping it is re-thrown as the same type with
/// "context: " prepended to the message.
template <class F>
decltype(auto) with_context(const std::string& context, F&& fn) {
    const auto msg = [&](const std::exception& e) { return context + ": " + e.what(); };
    try {
        return fn();
    } catch (const StabilityError& e) {
        throw StabilityError(msg(e));
    } catch (const NumericError& e) {
        throw NumericError(msg(e));
    } catch (const ShapeError& e) {
        throw ShapeError(msg(e));
    } catch (const SplitError& e) {
        throw SplitError(msg(e));
    } catch (const DegenerateDataError& e) {
        throw DegenerateDataError(msg(e));
    } catch (const SchemaError& e) {
        throw SchemaError(msg(e));
    } catch (const DataError& e) {
        throw DataError(msg(e));
    } catch (const ConfigError& e) {
        throw ConfigError(msg(e));
    } catch (const DomainError& e) {
        throw DomainError(msg(e));
    } catch (const Error& e) {
        throw Error(msg(e));
    }
}

/// Process exit codes used by the command-line tool.
enum class ExitCode : int { ok = 0, failure = 1, config = 2, data = 3, numeric = 4 };

/// Maps an exception to the exit code documented for the CLI.
inline ExitCode exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) {
        return ExitCode::config;
    }
    if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const ShapeError*>(&e)) {
        return ExitCode::data;
    }
    if (dynamic_cast<const NumericError*>(&e)) {
        return ExitCode::numeric;
    }
    return ExitCode::failure;
}

}  // namespace bnsfuzzy
