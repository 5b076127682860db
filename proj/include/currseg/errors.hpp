#pragma once

#include <stdexcept>
#include <string>

namespace currseg {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raster operands (masks, images, priors) with incompatible dimensions.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Malformed or rejected configuration (bad keys, bad values).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Dataset / file-ingestion failures (missing files, schema violations).
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// A sidecar or exchange document that parsed but does not match the schema.
class SchemaError : public DataError {
 public:
  explicit SchemaError(const std::string& msg) : DataError(msg) {}
};

// Prompt coordinates or boxes outside the image, degenerate boxes.
class PromptError : public Error {
 public:
  explicit PromptError(const std::string& msg) : Error(msg) {}
};

// External segmenter adapter: the three failure modes are distinct types so
// callers can tell a missing executable from a hung one from a bad mask.
class AdapterLaunchError : public Error {
 public:
  explicit AdapterLaunchError(const std::string& msg) : Error(msg) {}
};

class AdapterTimeoutError : public Error {
 public:
  explicit AdapterTimeoutError(const std::string& msg) : Error(msg) {}
};

class AdapterMaskError : public Error {
 public:
  explicit AdapterMaskError(const std::string& msg) : Error(msg) {}
};

}  // namespace currseg
