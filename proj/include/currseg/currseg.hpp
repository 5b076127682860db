#pragma once

// Umbrella header for the curriculum-prompting segmentation library.

#include "currseg/adapter.hpp"
#include "currseg/boxes.hpp"
#include "currseg/config.hpp"
#include "currseg/contours.hpp"
#include "currseg/curriculum.hpp"
#include "currseg/dataset.hpp"
#include "currseg/errors.hpp"
#include "currseg/evaluate.hpp"
#include "currseg/features.hpp"
#include "currseg/filters.hpp"
#include "currseg/image.hpp"
#include "currseg/losses.hpp"
#include "currseg/metrics.hpp"
#include "currseg/overlay.hpp"
#include "currseg/png_io.hpp"
#include "currseg/promptgen.hpp"
#include "currseg/prompts.hpp"
#include "currseg/random_walker.hpp"
#include "currseg/report.hpp"
#include "currseg/rng.hpp"
#include "currseg/segmenter.hpp"
#include "currseg/sidecar.hpp"
#include "currseg/synthetic.hpp"
