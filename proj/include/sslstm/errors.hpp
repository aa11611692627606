#pragma once

#include <stdexcept>
#include <string>

namespace sslstm {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define SSLSTM_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& what) : Error(what) {}    \
    }

// embedding
SSLSTM_DEFINE_ERROR(EmbeddingTooLong);
SSLSTM_DEFINE_ERROR(NonFiniteInput);
SSLSTM_DEFINE_ERROR(WindowTooLarge);
SSLSTM_DEFINE_ERROR(InvalidStep);
SSLSTM_DEFINE_ERROR(EmptyMatrix);

// subspace
SSLSTM_DEFINE_ERROR(EmptyInput);
SSLSTM_DEFINE_ERROR(InsufficientRows);
SSLSTM_DEFINE_ERROR(DegenerateSpectrum);
SSLSTM_DEFINE_ERROR(RankDeficientBlock);

// sgvmd
SSLSTM_DEFINE_ERROR(ZeroEnergy);

// lstm
SSLSTM_DEFINE_ERROR(ShapeMismatch);
SSLSTM_DEFINE_ERROR(DivergenceDetected);
SSLSTM_DEFINE_ERROR(WindowLengthMismatch);

// metrics / pipeline
SSLSTM_DEFINE_ERROR(LengthMismatch);
SSLSTM_DEFINE_ERROR(ZeroDenominator);
SSLSTM_DEFINE_ERROR(ConfigError);

// io
SSLSTM_DEFINE_ERROR(ParseError);
SSLSTM_DEFINE_ERROR(IoError);

#undef SSLSTM_DEFINE_ERROR

}  // namespace sslstm
