from .approx import ApproxResult, best_ls, best_uniform, dual_lower_bound, equioscillation_residual
from .bounds import (
    BoundParams,
    BoundReport,
    CorollaryResult,
    OrderSummary,
    const_Ca,
    const_Cab,
    verify_corollary1,
    verify_corollary2,
    verify_derivative_ball,
    verify_duality_chain,
    verify_lemmas,
    verify_sup_lower_extra,
    verify_theorem1,
    verify_theorem2,
)
from .builder import Study
from .config import DEFAULT_TOLERANCES, Tolerances
from .norms import GridFunction, lp_norm, pairing, sup_norm
from .psi_core import (
    Characteristics,
    ClassReport,
    PsiSpec,
    characteristics,
    classify,
    exp_family_thresholds,
    psi_eval,
    psi_inverse,
    tail_integral,
)
from .trig_poly import (
    KernelSpec,
    TrigPoly,
    dirichlet,
    extremal_difference,
    kernel_eval,
    kernel_poly,
    psi_beta_derivative,
    psi_beta_integral,
    w_nm,
)

__all__ = [
    'ApproxResult',
    'BoundParams',
    'BoundReport',
    'Characteristics',
    'ClassReport',
    'CorollaryResult',
    'DEFAULT_TOLERANCES',
    'GridFunction',
    'KernelSpec',
    'OrderSummary',
    'PsiSpec',
    'Study',
    'Tolerances',
    'TrigPoly',
    'best_ls',
    'best_uniform',
    'characteristics',
    'classify',
    'const_Ca',
    'const_Cab',
    'dirichlet',
    'dual_lower_bound',
    'equioscillation_residual',
    'exp_family_thresholds',
    'extremal_difference',
    'kernel_eval',
    'kernel_poly',
    'lp_norm',
    'pairing',
    'psi_beta_derivative',
    'psi_beta_integral',
    'psi_eval',
    'psi_inverse',
    'sup_norm',
    'tail_integral',
    'verify_corollary1',
    'verify_corollary2',
    'verify_derivative_ball',
    'verify_duality_chain',
    'verify_lemmas',
    'verify_sup_lower_extra',
    'verify_theorem1',
    'verify_theorem2',
    'w_nm',
]
