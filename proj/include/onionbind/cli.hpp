#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace onionbind::cli {

// Entry point behind main(). Routes keygen, vanity, bind, trust, verify,
// notary serve, notary query and demo; returns the process exit code.
// Usage problems exit 2; verify exits 0 only for an Authentic verdict.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace onionbind::cli
