#pragma once

#include <stdexcept>
#include <string>

namespace vqalab {

// Error kinds, mirrored one-to-one by the C API status codes.
enum class ErrorCode {
  InvalidArgument = 1,
  Io = 2,
  Parse = 3,
  Config = 4,
  InvalidQuestion = 5,
  Generation = 6,
  Oracle = 7,
  Model = 8,
  Sim = 9,
  Batch = 10,
  Trainer = 11,
  Metrics = 12,
  Internal = 13,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

#define VQALAB_DEFINE_ERROR(NAME, CODE)                          \
  class NAME : public Error {                                    \
   public:                                                       \
    explicit NAME(std::string message)                           \
        : Error(ErrorCode::CODE, std::move(message)) {}          \
  }

VQALAB_DEFINE_ERROR(InvalidArgumentError, InvalidArgument);
VQALAB_DEFINE_ERROR(IoError, Io);
VQALAB_DEFINE_ERROR(ParseError, Parse);
VQALAB_DEFINE_ERROR(ConfigError, Config);
VQALAB_DEFINE_ERROR(InvalidQuestionError, InvalidQuestion);
VQALAB_DEFINE_ERROR(GenerationError, Generation);
VQALAB_DEFINE_ERROR(OracleError, Oracle);
VQALAB_DEFINE_ERROR(ModelError, Model);
VQALAB_DEFINE_ERROR(SimError, Sim);
VQALAB_DEFINE_ERROR(BatchError, Batch);
VQALAB_DEFINE_ERROR(TrainerError, Trainer);
VQALAB_DEFINE_ERROR(MetricsError, Metrics);
VQALAB_DEFINE_ERROR(InternalError, Internal);

#undef VQALAB_DEFINE_ERROR

}  // namespace vqalab
