#pragma once

#include "jkcv/config.hpp"
#include "jkcv/core.hpp"
#include "jkcv/estimate.hpp"
#include "jkcv/io.hpp"
#include "jkcv/learners.hpp"
#include "jkcv/meta.hpp"
#include "jkcv/parallel.hpp"
#include "jkcv/params.hpp"
#include "jkcv/partition.hpp"
#include "jkcv/synthetic.hpp"
#include "jkcv/textfeat.hpp"
#include "jkcv/tune.hpp"
