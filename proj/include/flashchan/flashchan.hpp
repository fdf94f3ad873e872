#pragma once

#include "flashchan/bits.hpp"
#include "flashchan/channels.hpp"
#include "flashchan/ecc/bounded_distance.hpp"
#include "flashchan/ecc/parity_check.hpp"
#include "flashchan/ecc/qc_ldpc.hpp"
#include "flashchan/ecc/sum_product.hpp"
#include "flashchan/error_data.hpp"
#include "flashchan/errors.hpp"
#include "flashchan/fer.hpp"
#include "flashchan/ks.hpp"
#include "flashchan/model_io.hpp"
#include "flashchan/rng.hpp"
#include "flashchan/samplers.hpp"
#include "flashchan/version.hpp"
