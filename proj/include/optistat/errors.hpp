#pragma once

#include <stdexcept>
#include <string>

namespace optistat {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define OPTISTAT_ERROR(Name)            \
  struct Name : Error {                 \
    using Error::Error;                 \
  };

OPTISTAT_ERROR(ParseError)
OPTISTAT_ERROR(DuplicateIdError)
OPTISTAT_ERROR(ValueError)
OPTISTAT_ERROR(EmptyInputError)
OPTISTAT_ERROR(MissingCellError)
OPTISTAT_ERROR(MonotonicityError)
OPTISTAT_ERROR(SizeError)
OPTISTAT_ERROR(DegenerateError)
OPTISTAT_ERROR(UnknownIdError)
OPTISTAT_ERROR(ShapeError)
OPTISTAT_ERROR(ModeError)

#undef OPTISTAT_ERROR

}  // namespace optistat
