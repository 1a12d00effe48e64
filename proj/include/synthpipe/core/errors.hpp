#pragma once

#include <stdexcept>
#include <string>

namespace synthpipe {

/// Base class for all pipeline errors.
struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : PipelineError {
  using PipelineError::PipelineError;
};

/// Malformed input (bad JSON line, bad enum value, bad file header).
struct ParseError : PipelineError {
  using PipelineError::PipelineError;
};

/// Manifest hierarchy violation (video claimed by two patients, split
/// conflict, positive frame label inside a negative video).
struct HierarchyError : PipelineError {
  using PipelineError::PipelineError;
};

struct DuplicateIdError : PipelineError {
  using PipelineError::PipelineError;
};

/// Constant image in z-score mode (per-frame std below 1e-8).
struct DegenerateFrameError : PipelineError {
  using PipelineError::PipelineError;
};

struct InsufficientPatientsError : PipelineError {
  using PipelineError::PipelineError;
};

struct ShapeError : PipelineError {
  using PipelineError::PipelineError;
};

struct DivergenceError : PipelineError {
  using PipelineError::PipelineError;
};

struct EmptyDatasetError : PipelineError {
  using PipelineError::PipelineError;
};

struct BackboneLoadError : PipelineError {
  using PipelineError::PipelineError;
};

/// All points of an embedding set identical (median heuristic undefined).
struct DegenerateSetError : PipelineError {
  using PipelineError::PipelineError;
};

struct DimensionMismatchError : PipelineError {
  using PipelineError::PipelineError;
};

struct UntrainedClassifierError : PipelineError {
  using PipelineError::PipelineError;
};

/// ROC requested but labels contain only one class.
struct SingleClassError : PipelineError {
  using PipelineError::PipelineError;
};

struct EmptySeriesError : PipelineError {
  using PipelineError::PipelineError;
};

struct MissingCheckpointError : PipelineError {
  using PipelineError::PipelineError;
};

struct InvalidConfigError : PipelineError {
  using PipelineError::PipelineError;
};

/// Patient-level split integrity violation (synthetic frame in a real-only
/// set, or training provenance intersecting holdout patients).
struct LeakageError : PipelineError {
  using PipelineError::PipelineError;
};

}  // namespace synthpipe
