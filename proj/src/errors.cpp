#include "wirefit/errors.hpp"

namespace wirefit {

std::string_view to_string(FormatErrorKind kind) {
    switch (kind) {
        case FormatErrorKind::BadMagic: return "bad magic";
        case FormatErrorKind::Truncated: return "truncated payload";
        case FormatErrorKind::SizeMismatch: return "size mismatch";
        case FormatErrorKind::VersionMismatch: return "version mismatch";
        case FormatErrorKind::ShapeMismatch: return "shape mismatch";
        case FormatErrorKind::NonFinite: return "non-finite value";
        case FormatErrorKind::Io: return "i/o failure";
    }
    return "unknown format error";
}

}  // namespace wirefit
