#pragma once

#include "relaxcouple/coupling.hpp"
#include "relaxcouple/dg.hpp"
#include "relaxcouple/errors.hpp"
#include "relaxcouple/experiments.hpp"
#include "relaxcouple/fv.hpp"
#include "relaxcouple/gkc.hpp"
#include "relaxcouple/grid.hpp"
#include "relaxcouple/matkernels.hpp"
#include "relaxcouple/matrix.hpp"
#include "relaxcouple/models.hpp"
#include "relaxcouple/norms.hpp"
#include "relaxcouple/quadrature.hpp"
#include "relaxcouple/report.hpp"
#include "relaxcouple/spectral.hpp"
#include "relaxcouple/svg.hpp"
#include "relaxcouple/sysmodel.hpp"
