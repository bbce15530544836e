#ifndef SYMDIRECT_SYMDIRECT_HPP
#define SYMDIRECT_SYMDIRECT_HPP

#include "expr.hpp"
#include "leitmann.hpp"
#include "noether.hpp"
#include "oracle.hpp"
#include "problem.hpp"
#include "problem_io.hpp"
#include "report.hpp"
#include "symmetry.hpp"
#include "transform.hpp"

#endif
