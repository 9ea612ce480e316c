#pragma once

#include "stance/corpus.hpp"
#include "stance/eval.hpp"
#include "stance/features.hpp"
#include "stance/format.hpp"
#include "stance/ner.hpp"
#include "stance/sparse.hpp"
#include "stance/svm.hpp"
#include "stance/text.hpp"
