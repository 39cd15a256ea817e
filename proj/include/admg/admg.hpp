#ifndef ADMG_ADMG_HPP
#define ADMG_ADMG_HPP

#include "admg/node_set.hpp"
#include "admg/error.hpp"
#include "admg/graph.hpp"
#include "admg/dsl.hpp"
#include "admg/separation.hpp"
#include "admg/surgery.hpp"
#include "admg/estimand.hpp"
#include "admg/gaussian.hpp"
#include "admg/sem.hpp"
#include "admg/identify.hpp"
#include "admg/learn.hpp"
#include "admg/gated.hpp"

#endif // ADMG_ADMG_HPP
