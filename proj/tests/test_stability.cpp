#include <catch2/catch_amalgamated.hpp>
#include "qlab/qlab.hpp"
