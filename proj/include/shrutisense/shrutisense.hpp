#pragma once

#include "shrutisense/datagen.hpp"
#include "shrutisense/errors.hpp"
#include "shrutisense/eval.hpp"
#include "shrutisense/fst.hpp"
#include "shrutisense/hmm.hpp"
#include "shrutisense/raga.hpp"
#include "shrutisense/rng.hpp"
#include "shrutisense/scale.hpp"
#include "shrutisense/seqfile.hpp"
#include "shrutisense/wav.hpp"
