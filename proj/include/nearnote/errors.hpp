#pragma once

#include <stdexcept>
#include <string>

namespace nearnote {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class MalformedId : public Error {
public:
    explicit MalformedId(const std::string& what) : Error(what) {}
};

class InvalidCoordinate : public Error {
public:
    explicit InvalidCoordinate(const std::string& what) : Error(what) {}
};

class OutOfOrderScan : public Error {
public:
    explicit OutOfOrderScan(const std::string& what) : Error(what) {}
};

class UnknownContact : public Error {
public:
    explicit UnknownContact(const std::string& what) : Error(what) {}
};

class UnknownLocation : public Error {
public:
    explicit UnknownLocation(const std::string& what) : Error(what) {}
};

class UnknownDevice : public Error {
public:
    explicit UnknownDevice(const std::string& what) : Error(what) {}
};

class IntegrityViolation : public Error {
public:
    explicit IntegrityViolation(const std::string& what) : Error(what) {}
};

class NotFound : public Error {
public:
    explicit NotFound(const std::string& what) : Error(what) {}
};

class MissingCarrierTrigger : public Error {
public:
    explicit MissingCarrierTrigger(const std::string& what) : Error(what) {}
};

// Transport is unreachable; the caller's state must be left untouched.
class LinkDown : public Error {
public:
    explicit LinkDown(const std::string& what) : Error(what) {}
};

class UnknownSender : public Error {
public:
    explicit UnknownSender(const std::string& what) : Error(what) {}
};

// A detection log line that does not match the grammar.
class MalformedLine : public Error {
public:
    MalformedLine(std::size_t lineno, const std::string& reason)
        : Error("line " + std::to_string(lineno) + ": " + reason),
          lineno(lineno),
          reason(reason) {}

    std::size_t lineno;
    std::string reason;
};

class ScriptError : public Error {
public:
    ScriptError(std::size_t lineno, const std::string& reason)
        : Error("script line " + std::to_string(lineno) + ": " + reason),
          lineno(lineno) {}

    std::size_t lineno;
};

class StoreError : public Error {
public:
    explicit StoreError(const std::string& what) : Error(what) {}
};

}  // namespace nearnote
