#ifndef ERGOFLOW_ERRORS_HPP
#define ERGOFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace ergoflow
{

// Every domain failure raised by the library derives from Error and carries a
// stable name (e.g. "InsufficientDepth") that the CLI reports verbatim.
class Error : public std::runtime_error
{
public:
    Error(std::string_view name, const std::string &what)
        : std::runtime_error(std::string(name) + ": " + what), name_(name)
    {
    }

    [[nodiscard]] std::string_view name() const noexcept { return name_; }

private:
    std::string_view name_;
};

#define ERGOFLOW_DEFINE_ERROR(Type)                                                                                    \
    class Type : public Error                                                                                          \
    {                                                                                                                  \
    public:                                                                                                            \
        explicit Type(const std::string &what) : Error(#Type, what) {}                                                 \
    }

ERGOFLOW_DEFINE_ERROR(InvalidCF);
ERGOFLOW_DEFINE_ERROR(InsufficientDepth);
ERGOFLOW_DEFINE_ERROR(TooLargeForExhaustive);
ERGOFLOW_DEFINE_ERROR(InvalidCount);
ERGOFLOW_DEFINE_ERROR(BudgetExceeded);
ERGOFLOW_DEFINE_ERROR(InvalidRoof);
ERGOFLOW_DEFINE_ERROR(DiscontinuityHit);
ERGOFLOW_DEFINE_ERROR(InsufficientModes);
ERGOFLOW_DEFINE_ERROR(UnsupportedRoof);
ERGOFLOW_DEFINE_ERROR(RangeError);
ERGOFLOW_DEFINE_ERROR(MissingMode);
ERGOFLOW_DEFINE_ERROR(DegenerateStretch);
ERGOFLOW_DEFINE_ERROR(ConstructionFailed);
ERGOFLOW_DEFINE_ERROR(PartitionFailed);
ERGOFLOW_DEFINE_ERROR(InvalidArgument);

#undef ERGOFLOW_DEFINE_ERROR

} // namespace ergoflow

#endif
