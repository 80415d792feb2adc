#pragma once

#include <stdexcept>
#include <string>

namespace ordaudit {

// Error taxonomy mirrors the CLI exit codes: configuration problems,
// data/provenance problems, and statistical degeneracy are distinguished
// so callers can map them without string matching.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegeneracyError : std::runtime_error {
    explicit DegeneracyError(const std::string& msg) : std::runtime_error(msg) {}
};

// corpus
struct TemplateMismatch : DataError {
    explicit TemplateMismatch(const std::string& msg) : DataError(msg) {}
};
struct LabelOutOfRange : DataError {
    explicit LabelOutOfRange(const std::string& msg) : DataError(msg) {}
};
struct EmptyDataset : DataError {
    explicit EmptyDataset(const std::string& msg) : DataError(msg) {}
};
struct ManifestMismatch : DataError {
    explicit ManifestMismatch(const std::string& msg) : DataError(msg) {}
};

// grid
struct DuplicateCell : DataError {
    explicit DuplicateCell(const std::string& msg) : DataError(msg) {}
};
struct MissingCell : DataError {
    explicit MissingCell(const std::string& msg) : DataError(msg) {}
};
struct UnknownItem : DataError {
    explicit UnknownItem(const std::string& msg) : DataError(msg) {}
};
struct UnknownModel : DataError {
    explicit UnknownModel(const std::string& msg) : DataError(msg) {}
};
struct UnknownPolicy : DataError {
    explicit UnknownPolicy(const std::string& msg) : DataError(msg) {}
};
struct UnknownCell : DataError {
    explicit UnknownCell(const std::string& msg) : DataError(msg) {}
};

// metrics / stats
struct LengthMismatch : DataError {
    explicit LengthMismatch(const std::string& msg) : DataError(msg) {}
};
struct InvalidCount : DataError {
    explicit InvalidCount(const std::string& msg) : DataError(msg) {}
};
struct DegenerateMarginals : DegeneracyError {
    explicit DegenerateMarginals(const std::string& msg) : DegeneracyError(msg) {}
};
struct InfeasibleDesign : DegeneracyError {
    explicit InfeasibleDesign(const std::string& msg) : DegeneracyError(msg) {}
};
struct DegenerateComparisons : DegeneracyError {
    explicit DegenerateComparisons(const std::string& msg) : DegeneracyError(msg) {}
};
struct IncompleteTable : DataError {
    explicit IncompleteTable(const std::string& msg) : DataError(msg) {}
};
struct ModelSetMismatch : DataError {
    explicit ModelSetMismatch(const std::string& msg) : DataError(msg) {}
};
struct NoEligiblePairs : DataError {
    explicit NoEligiblePairs(const std::string& msg) : DataError(msg) {}
};
struct EmptySubset : DataError {
    explicit EmptySubset(const std::string& msg) : DataError(msg) {}
};
struct UnnormalizedMarginal : DataError {
    explicit UnnormalizedMarginal(const std::string& msg) : DataError(msg) {}
};

// synth
struct InfeasibleCell : DataError {
    explicit InfeasibleCell(const std::string& msg) : DataError(msg) {}
};
struct InfeasibleEffect : DataError {
    explicit InfeasibleEffect(const std::string& msg) : DataError(msg) {}
};

}  // namespace ordaudit
