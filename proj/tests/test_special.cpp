#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "thermosense/special.hpp"

namespace ts = thermosense;

TEST_CASE("erf reference values") {
    CHECK(ts::erf(0.0) == 0.0);
    CHECK(ts::erf(1.0) == doctest::Approx(0.8427007929).epsilon(1e-10));
    CHECK(ts::erf(-1.0) == -ts::erf(1.0));
    CHECK(ts::erf(0.5) == doctest::Approx(0.5204998778).epsilon(1e-10));
    CHECK(ts::erf(2.0) == doctest::Approx(0.9953222650).epsilon(1e-10));
}

TEST_CASE("erf matches the C library across the series and continued-fraction ranges") {
    double worst = 0.0;
    for (double z = -7.0; z <= 7.0; z += 0.01) {
        worst = std::max(worst, std::abs(ts::erf(z) - std::erf(z)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("erfc keeps relative accuracy in the tail") {
    for (double z : {0.0, 0.3, 1.0, 2.9, 3.0, 3.1, 4.5, 6.0, 8.0, 12.0, 20.0}) {
        CAPTURE(z);
        CHECK(ts::erfc(z) == doctest::Approx(std::erfc(z)).epsilon(1e-11));
    }
    CHECK(ts::erfc(-2.0) == doctest::Approx(2.0 - std::erfc(2.0)).epsilon(1e-14));
    CHECK(ts::erfc(30.0) == 0.0);
}

TEST_CASE("erf is odd and saturates") {
    for (double z : {0.1, 0.7, 2.5, 3.5, 5.9}) CHECK(ts::erf(-z) == -ts::erf(z));
    CHECK(ts::erf(6.5) == 1.0);
    CHECK(ts::erf(-50.0) == -1.0);
}
