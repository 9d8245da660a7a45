"""Exact and validated computations on flat functions e^{-p(1/x)} L(1/x)."""

from flatlab.ball import Ball
from flatlab.cache import DerivativeCache
from flatlab.census import (CensusRow, QuasiIntervalPartition, YTable, iter_census,
                            check_interlacing, check_min_zero_decreasing, check_s_monotone,
                            check_z_monotone, gap_report, y_table)
from flatlab.errors import (CacheCorrupt, EvalAtPole, FlatlabError, HypothesisViolated,
                            NotEnoughZeros, SpecParseError, ToleranceUnreachable,
                            UnresolvedOrder)
from flatlab.flatfun import (ExpPolyFlatFunction, ZeroSet, differentiate, eval_ball,
                             nth_derivative, zero_set)
from flatlab.funcspec import FunctionSpec, parse_spec
from flatlab.laurent import LaurentPoly, RootBracket, isolate_roots, sign_at, square_free
from flatlab.numeric import (NumericFunction, QuadratureResult, derivative_shift, g0,
                             g0_zeros_in, gn, sign_scan)
from flatlab.report import Report
from flatlab.verify import (Lemma4Instance, WitnessReport, lemma4_check, lemma7_probe,
                            numerator_check, rescale_to_unit, theorem1_witness)

__version__ = "0.1.0"
