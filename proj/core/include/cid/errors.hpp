#pragma once

#include <stdexcept>
#include <string>

namespace cid {

/// Error categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
    usage = 1,
    validation = 2,
    query = 3,
    resource = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& message) : Error(ErrorKind::usage, message) {}
};

/// Malformed model: bad document, broken invariant, unknown state label.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message)
        : Error(ErrorKind::validation, message) {}
};

/// A well-formed model that cannot answer the question asked of it.
class QueryError : public Error {
public:
    explicit QueryError(const std::string& message) : Error(ErrorKind::query, message) {}
};

/// A configurable enumeration cap was hit.
class ResourceError : public Error {
public:
    explicit ResourceError(const std::string& message)
        : Error(ErrorKind::resource, message) {}
};

#define CID_DEFINE_ERROR(Name, Base)                                        \
    class Name : public Base {                                              \
    public:                                                                 \
        explicit Name(const std::string& message) : Base(message) {}        \
    }

CID_DEFINE_ERROR(UnknownVariable, QueryError);
CID_DEFINE_ERROR(ZeroProbabilityEvidence, QueryError);
CID_DEFINE_ERROR(NotObservable, QueryError);
CID_DEFINE_ERROR(NotCausal, QueryError);
CID_DEFINE_ERROR(NotInHcf, QueryError);
CID_DEFINE_ERROR(ReassessmentRequired, QueryError);
CID_DEFINE_ERROR(DependentMechanismsUnassessed, QueryError);
CID_DEFINE_ERROR(NoUtilityNode, QueryError);
CID_DEFINE_ERROR(NoDecisionOrder, QueryError);
CID_DEFINE_ERROR(NodeBudgetExceeded, ResourceError);
CID_DEFINE_ERROR(StateSpaceExceeded, ResourceError);
CID_DEFINE_ERROR(PolicySpaceExceeded, ResourceError);

#undef CID_DEFINE_ERROR

}  // namespace cid
