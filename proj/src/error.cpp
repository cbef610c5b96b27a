#include "bugcast/error.hpp"

namespace bugcast {

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Io:
        case ErrorKind::Network:
            return 2;
        case ErrorKind::Parse:
        case ErrorKind::Validation:
        case ErrorKind::InsufficientData:
        case ErrorKind::InvalidRange:
        case ErrorKind::UnknownWeek:
        case ErrorKind::InvalidLag:
        case ErrorKind::Alignment:
        case ErrorKind::TransformDomain:
        case ErrorKind::Shape:
            return 3;
        case ErrorKind::Degenerate:
        case ErrorKind::RankDeficient:
            return 3;
        case ErrorKind::Divergence:
            return 1;
    }
    return 1;
}

}  // namespace bugcast
