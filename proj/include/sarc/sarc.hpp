#pragma once

#include "sarc/error.hpp"
#include "sarc/random.hpp"
#include "sarc/parallel.hpp"
#include "sarc/matrix.hpp"
#include "sarc/data_model.hpp"
#include "sarc/synth.hpp"
#include "sarc/annotate.hpp"
#include "sarc/segment.hpp"
#include "sarc/features.hpp"
#include "sarc/trees.hpp"
#include "sarc/classifiers.hpp"
#include "sarc/nn.hpp"
#include "sarc/crnn.hpp"
#include "sarc/select.hpp"
#include "sarc/eval.hpp"
#include "sarc/serialize.hpp"
#include "sarc/svg.hpp"
#include "sarc/pipeline.hpp"
