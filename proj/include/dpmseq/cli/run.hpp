#pragma once

#include <iosfwd>

namespace dpmseq::cli {

/// Entry point of the command-line tool.  Returns the process exit status;
/// on failure writes one line "error: <kind>: <message>" to `err`.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

} // namespace dpmseq::cli
