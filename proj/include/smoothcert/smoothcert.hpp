#pragma once

#include "smoothcert/adam.hpp"
#include "smoothcert/classifier.hpp"
#include "smoothcert/classifier_train.hpp"
#include "smoothcert/dataset.hpp"
#include "smoothcert/diffusion.hpp"
#include "smoothcert/net.hpp"
#include "smoothcert/report.hpp"
#include "smoothcert/rng.hpp"
#include "smoothcert/serialize.hpp"
#include "smoothcert/shiftattack.hpp"
#include "smoothcert/shiftmeter.hpp"
#include "smoothcert/smoothing.hpp"
#include "smoothcert/stats.hpp"
#include "smoothcert/tensor.hpp"
