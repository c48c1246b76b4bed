#include "rdg/util/errors.hpp"
