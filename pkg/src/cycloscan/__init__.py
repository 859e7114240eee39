"""cycloscan: cyclicity and exponent statistics of elliptic curves mod p.

Scans good primes in an arithmetic progression, records the group structure
Z/d + Z/e of each reduction, verifies the exact combinatorial identities the
counts satisfy, and compares the observed densities against truncated
conjectural constants and error-envelope shapes.
"""

from cycloscan.arith import (
    Factorization,
    big_H,
    divisors,
    euler_phi,
    factorize,
    inner_mu_sum,
    is_prime,
    log_integral,
    mobius,
    omega,
    segmented_primes,
    squarefree_divisors,
    tau2,
)
from cycloscan.curve import (
    BadReduction,
    CurveSpec,
    ReducedCurve,
    legendre,
    point_count_bsgs,
    point_count_naive,
    reduce_curve,
    sqrt_mod,
)
from cycloscan.structure import PrimeRecord, group_structure, is_cyclic, m_torsion_rational
from cycloscan.scan import (
    Accumulator,
    ScanConfig,
    exponent_identity_check,
    inclusion_exclusion_check,
    pi_E_m,
    run_scan,
)
from cycloscan.constants import (
    DensityEstimate,
    c_constant,
    e_constant,
    empirical_delta,
    generic_degree,
    gl2_order,
)
from cycloscan.bounds import (
    BoundsInput,
    EnvelopeReport,
    G_D_bound,
    R_E_q1,
    envelope_ag_cm,
    envelope_cm_grh,
    envelope_exp,
    envelope_noncm_grh,
    envelope_siegel,
    q_split,
    residual_report,
)

__version__ = "0.1.0"
