#pragma once

#include <stdexcept>
#include <string>

namespace tomsim {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments to a builder, suite generator, or CLI command.
class InvalidParams : public Error {
public:
    explicit InvalidParams(const std::string& msg) : Error("InvalidParams: " + msg) {}
};

// Malformed input file. `locus` names the line or field when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error("ParseError: " + msg) {}
    ParseError(const std::string& msg, const std::string& locus)
        : Error("ParseError: " + msg + " (" + locus + ")"), locus_(locus) {}
    const std::string& locus() const { return locus_; }

private:
    std::string locus_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("IoError: " + msg) {}
};

// Pinned specs cannot be realized by any event sequence.
class Unsatisfiable : public Error {
public:
    explicit Unsatisfiable(const std::string& msg) : Error("Unsatisfiable: " + msg) {}
};

class InconsistentStory : public Error {
public:
    explicit InconsistentStory(const std::string& msg) : Error("InconsistentStory: " + msg) {}
};

class UnknownBelief : public Error {
public:
    explicit UnknownBelief(const std::string& msg) : Error("UnknownBelief: " + msg) {}
};

class NoCoLocation : public Error {
public:
    explicit NoCoLocation(const std::string& msg) : Error("NoCoLocation: " + msg) {}
};

class NoSubsequentMove : public Error {
public:
    explicit NoSubsequentMove(const std::string& msg) : Error("NoSubsequentMove: " + msg) {}
};

class UnknownEnvironment : public Error {
public:
    explicit UnknownEnvironment(const std::string& msg) : Error("UnknownEnvironment: " + msg) {}
};

class MissingRole : public Error {
public:
    explicit MissingRole(const std::string& msg) : Error("MissingRole: " + msg) {}
};

class UnknownTemplate : public Error {
public:
    explicit UnknownTemplate(const std::string& msg) : Error("UnknownTemplate: " + msg) {}
};

class TransformerUnavailable : public Error {
public:
    explicit TransformerUnavailable(const std::string& msg) : Error("TransformerUnavailable: " + msg) {}
};

class GuardExhausted : public Error {
public:
    explicit GuardExhausted(const std::string& msg) : Error("GuardExhausted: " + msg) {}
};

class ManifestMismatch : public Error {
public:
    explicit ManifestMismatch(const std::string& msg) : Error("ManifestMismatch: " + msg) {}
};

class DuplicateResponse : public Error {
public:
    explicit DuplicateResponse(const std::string& msg) : Error("DuplicateResponse: " + msg) {}
};

class RecordMismatch : public Error {
public:
    explicit RecordMismatch(const std::string& msg) : Error("RecordMismatch: " + msg) {}
};

class UnknownField : public Error {
public:
    explicit UnknownField(const std::string& msg) : Error("UnknownField: " + msg) {}
};

class AuthError : public Error {
public:
    explicit AuthError(const std::string& msg) : Error("AuthError: " + msg) {}
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& msg) : Error("TransportError: " + msg) {}
};

class MalformedProviderReply : public Error {
public:
    explicit MalformedProviderReply(const std::string& msg) : Error("MalformedProviderReply: " + msg) {}
};

}  // namespace tomsim
