#include "bandclt/error.hpp"

namespace bandclt {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidSpec: return "invalid_spec";
        case ErrorKind::InvalidArgument: return "invalid_argument";
        case ErrorKind::NumericInput: return "numeric_input";
        case ErrorKind::KernelSingularity: return "kernel_singularity";
        case ErrorKind::Accuracy: return "accuracy";
        case ErrorKind::InsufficientData: return "insufficient_data";
        case ErrorKind::ReplicateFailure: return "replicate_failure";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace bandclt
