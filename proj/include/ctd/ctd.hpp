#pragma once

#include "ctd/errors.hpp"
#include "ctd/numeric.hpp"
#include "ctd/tensor.hpp"
#include "ctd/kron.hpp"
#include "ctd/models.hpp"
#include "ctd/equivalence.hpp"
#include "ctd/uniqueness.hpp"
#include "ctd/estimation.hpp"
#include "ctd/io.hpp"
