#ifndef ETHICS_TRIAGE_HPP
#define ETHICS_TRIAGE_HPP

#include "classify.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "guideline.hpp"
#include "screening.hpp"
#include "topics.hpp"

#endif
