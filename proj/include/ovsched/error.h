#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ovsched {

enum class ErrorKind
{
    InadmissibleRequest,
    LengthMismatch,
    InstanceTooLarge,
    MismatchedInstance,
    NoPacketsSent,
    ParseError,
    ValidationError,
    MissingScheduler,
    IoError,
};

std::string_view ToString(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error
{
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what),
          m_kind(kind)
    {
    }

    ErrorKind Kind() const { return m_kind; }

  private:
    ErrorKind m_kind;
};

} // namespace ovsched
