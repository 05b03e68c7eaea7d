// Catch2 v3 amalgamated translation unit, compiled once and linked into
// every unit-test binary.
#include <catch2/catch_amalgamated.cpp>
