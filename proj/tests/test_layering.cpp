#include "doctest.h"
#include "test_util.hpp"

TEST_CASE("placeholder test_layering") { CHECK(true); }
