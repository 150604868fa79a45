#pragma once

#include <stdexcept>

namespace nxb {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent data: bad file contents, broken invariants,
// invalid argument values. Mapped to exit code 2 by the CLI.
class DataError : public Error {
public:
  using Error::Error;
};

// Filesystem / operating system failures. Mapped to exit code 3 by the CLI.
class IoFailure : public Error {
public:
  using Error::Error;
};

// schema
class MalformedPath : public DataError { public: using DataError::DataError; };
class RootHasNoParent : public DataError { public: using DataError::DataError; };

// store
class InvalidModel : public DataError { public: using DataError::DataError; };
class BadMagic : public DataError { public: using DataError::DataError; };
class TruncatedRecord : public DataError { public: using DataError::DataError; };
class DuplicatePath : public DataError { public: using DataError::DataError; };
class OrphanRecord : public DataError { public: using DataError::DataError; };
class NoSuchPath : public DataError { public: using DataError::DataError; };
class NotAGroup : public DataError { public: using DataError::DataError; };
class NoSuchAttribute : public DataError { public: using DataError::DataError; };
class NotADataset : public DataError { public: using DataError::DataError; };
class CorruptPayload : public DataError { public: using DataError::DataError; };

// loader
class MissingEntryGroup : public DataError { public: using DataError::DataError; };
class MalformedLog : public DataError { public: using DataError::DataError; };
class MalformedMonitor : public DataError { public: using DataError::DataError; };
class MissingDataset : public DataError { public: using DataError::DataError; };
class MalformedBank : public DataError { public: using DataError::DataError; };
class OverlappingPixelRanges : public DataError { public: using DataError::DataError; };

// synth
class UnknownProfile : public DataError { public: using DataError::DataError; };
class InvalidScale : public DataError { public: using DataError::DataError; };

// bench
class NonPositiveBaseline : public DataError { public: using DataError::DataError; };

}  // namespace nxb
