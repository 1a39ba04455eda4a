#pragma once

#include <stdexcept>
#include <string>

namespace levdyn {

// Every failure raised by the library derives from Error so that drivers can
// report a stage and exit non-zero without knowing the concrete kind.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define LEVDYN_DEFINE_ERROR(Name)             \
    class Name : public Error {               \
    public:                                   \
        using Error::Error;                   \
    }

LEVDYN_DEFINE_ERROR(DomainError);        // argument outside the documented range
LEVDYN_DEFINE_ERROR(InadmissibleError);  // parameters give max T >= 1
LEVDYN_DEFINE_ERROR(SingularError);      // evaluation at the critical point
LEVDYN_DEFINE_ERROR(ConvergenceError);   // iterative solver did not converge
LEVDYN_DEFINE_ERROR(DegenerateError);    // data do not support the estimate
LEVDYN_DEFINE_ERROR(NumericalError);     // non-finite value during simulation
LEVDYN_DEFINE_ERROR(TooShortError);      // series shorter than the method needs
LEVDYN_DEFINE_ERROR(ParseError);
LEVDYN_DEFINE_ERROR(SchemaError);
LEVDYN_DEFINE_ERROR(EmptyAfterFilterError);
LEVDYN_DEFINE_ERROR(IoError);

#undef LEVDYN_DEFINE_ERROR

}  // namespace levdyn
