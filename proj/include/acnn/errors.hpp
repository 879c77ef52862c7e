#pragma once

#include <stdexcept>
#include <string>

namespace acnn {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define ACNN_DECLARE_ERROR(Name)                                \
  struct Name : Error {                                         \
    explicit Name(const std::string& msg) : Error(msg) {}      \
  }

// Signal / feature extraction
ACNN_DECLARE_ERROR(ClipTooShort);
ACNN_DECLARE_ERROR(InvalidRange);
ACNN_DECLARE_ERROR(InsufficientFrames);
ACNN_DECLARE_ERROR(DimensionMismatch);

// Layers / model
ACNN_DECLARE_ERROR(KernelTooWide);
ACNN_DECLARE_ERROR(MissingCache);
ACNN_DECLARE_ERROR(MapTooShort);
ACNN_DECLARE_ERROR(EmptySequence);
ACNN_DECLARE_ERROR(InvalidConfig);
ACNN_DECLARE_ERROR(InputTooShort);
ACNN_DECLARE_ERROR(LabelOutOfRange);
ACNN_DECLARE_ERROR(ShapeMismatch);
ACNN_DECLARE_ERROR(FormatError);

// Data handling
ACNN_DECLARE_ERROR(ParseError);
ACNN_DECLARE_ERROR(MissingFile);
ACNN_DECLARE_ERROR(FrameCountMismatch);
ACNN_DECLARE_ERROR(MissingScenarioColumn);
ACNN_DECLARE_ERROR(MalformedCorpus);
ACNN_DECLARE_ERROR(EmptySubset);
ACNN_DECLARE_ERROR(IoError);

// Reporting
ACNN_DECLARE_ERROR(EmptyMatrix);
ACNN_DECLARE_ERROR(SchemaMismatch);

#undef ACNN_DECLARE_ERROR

}  // namespace acnn
