#pragma once

#include <cstdio>
#include <string>

namespace nev {

// 17 significant digits: round-trips any double exactly, keeps CSVs
// byte-identical across runs.
inline std::string fmt17(double v) {
    char buf[40];
    snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace nev
