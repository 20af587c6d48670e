#ifndef ETHICS_TRIAGE_GUIDELINE_HPP
#define ETHICS_TRIAGE_GUIDELINE_HPP

#include "guideline/lint.hpp"
#include "guideline/parser.hpp"
#include "guideline/render.hpp"
#include "guideline/report.hpp"
#include "guideline/session.hpp"
#include "guideline/tree.hpp"

#endif
