#pragma once

#include "bnsfuzzy/ml/common.hpp"
#include "bnsfuzzy/ml/grad_check.hpp"
#include "bnsfuzzy/ml/logistic.hpp"
#include "bnsfuzzy/ml/lstm.hpp"
#include "bnsfuzzy/ml/mlp.hpp"
#include "bnsfuzzy/ml/model.hpp"
#include "bnsfuzzy/ml/spec.hpp"
#include "bnsfuzzy/ml/tree.hpp"
