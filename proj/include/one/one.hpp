#ifndef ONE_ONE_HPP
#define ONE_ONE_HPP

#include "one/cli.hpp"
#include "one/core.hpp"
#include "one/errors.hpp"
#include "one/evaluation.hpp"
#include "one/network.hpp"
#include "one/numerics.hpp"
#include "one/seeder.hpp"
#include "one/version.hpp"

#endif  // ONE_ONE_HPP
