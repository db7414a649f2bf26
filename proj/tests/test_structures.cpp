#include "doctest.h"
#include "test_util.hpp"

TEST_CASE("placeholder test_structures") { CHECK(true); }
