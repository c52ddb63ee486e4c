#pragma once

#include <stdexcept>
#include <string>

namespace loggraph {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Ontology loading.
struct DescriptorParseError : Error { using Error::Error; };
struct SchemaInconsistency : Error { using Error::Error; };
struct UnknownClass : Error { using Error::Error; };

// Retrieval.
struct ProviderUnavailable : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct EmptyIndex : Error { using Error::Error; };

// Persistence.
struct StorageError : Error { using Error::Error; };
struct NotFound : Error { using Error::Error; };

// Model backend.
struct BackendError : Error { using Error::Error; };
struct Timeout : BackendError { using BackendError::BackendError; };
struct HTTPError : BackendError {
    HTTPError(int status, const std::string& what) : BackendError(what), status(status) {}
    int status;
};
// The model answered without invoking the output tool; treated as a
// syntactic failure and routed into the correction loop.
struct NoToolCall : BackendError { using BackendError::BackendError; };

// Evaluation.
struct EmptyInput : Error { using Error::Error; };
struct AlignmentError : Error { using Error::Error; };
struct DiversityExhausted : Error { using Error::Error; };
struct ScoreParseError : Error { using Error::Error; };

// CLI / configuration.
struct ConfigError : Error { using Error::Error; };

}  // namespace loggraph
