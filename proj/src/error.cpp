#include "cfkg/error.hpp"

namespace cfkg {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Schema: return "schema error";
        case ErrorKind::DanglingEndpoint: return "dangling endpoint";
        case ErrorKind::UnknownId: return "unknown id";
        case ErrorKind::EmptyPath: return "empty path";
        case ErrorKind::LengthMismatch: return "length mismatch";
        case ErrorKind::EmptyCorpus: return "empty corpus";
        case ErrorKind::DivisionGuard: return "division guard";
        case ErrorKind::Divergence: return "divergence";
        case ErrorKind::InfeasibleBudget: return "infeasible budget";
        case ErrorKind::MissingScore: return "missing score";
        case ErrorKind::DimensionMismatch: return "dimension mismatch";
        case ErrorKind::Io: return "i/o error";
    }
    return "error";
}

} // namespace cfkg
