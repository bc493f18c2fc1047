"""Analysis toolkit for tuples of invertible 2x2 real matrices.

Decides domination by constructing projective multicones, estimates
almost-multiplicativity constants, brackets the sub-additive pressure of
the norm potential, builds equilibrium states, and classifies them into
the nested Bernoulli / Gibbs / quasi-Bernoulli / Gibbs-type regions.
"""

from .planar import (Classification as MatrixClassification, Mat2, MatrixKind,
                     SpectralData, classify_matrix, det2, eigen_data, is_scalar,
                     norm_on_direction, normalize_det, op_norm, sv_pair, trace2)
from .projective import (ContainmentAnswer, Multicone, NotProper, ProjInterval,
                         act_direction, act_interval, contained, norm_direction,
                         proj_distance, strictly_inside)
from .semigroup import (CapExceeded, ConformalSplit, ConformalStructure,
                        EigenMultiplicativity, IrreducibilityResult,
                        KappaEstimate, MatrixTuple, SingularMatrix,
                        StrongConformality, conformal_split,
                        eigen_multiplicativity_check, enumerate_products,
                        irreducibility_check, kappa_estimate, kappa_table,
                        parse_word, strong_conformality_check, word_to_str)
from .domination import (DirectionCloud, DominationBudget, DominationResult,
                         HyperbolicPartCertificate, HyperbolicPartFailure,
                         MulticoneCertificate, RatioSequence, UnstableCheck,
                         Verdict, build_unstable_multicone,
                         certify_strong_invariance, contraction_depth_check,
                         direction_clouds, domination_decide,
                         find_unstable_multicone, hyperbolic_part_certificate,
                         invariant_unstable_multicone_check, ratio_sequence)
from .thermo import (CylinderMeasure, EtaResult, PotentialModel,
                     PreconditionFailed, PressureBounds, RatioBand,
                     ShadowingDeficit, TriangularEquilibrium,
                     bernoulli_equilibrium_triangular, entropy_and_lambda,
                     equilibrium_proxy_measure, eta_measure,
                     fit_locally_constant_potential, gibbs_type_ratio_test,
                     potential_from_certificate, pressure_bounds,
                     quasi_bernoulli_ratio_test, shadowing_deficit,
                     stress_pool)
from .transfer import NoConvergence, TransferSolution, transfer_equilibrium
from .classify import (Classification, ClassificationEvidence,
                       EquilibriumClass, equilibrium_classify)
from .config import JobConfig, ParseError, demo_config, load_config
from .report import (ClassificationReport, EquilibriumReport, MulticoneReport,
                     PressureReport, run_classify, run_equilibrium,
                     run_example1, run_multicone, run_pressure)

__version__ = "0.1.0"
