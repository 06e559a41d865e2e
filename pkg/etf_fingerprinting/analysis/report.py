"""
Analysis report: every bound for one design and coalition size, as ordered
``name = value`` entries. Quantities that cannot be computed are replaced
by a marker string instead of failing the whole report.
"""

import logging

from etf_fingerprinting.analysis.bounds import (
    bound_inputs_for,
    distance_lower_bound_coherence,
    distance_lower_bound_rip,
    ergun_scale,
    error_exponent,
    gershgorin_delta_bound,
    is_vacuous,
    minmax_bounds,
    optimal_threshold,
    simplex_distance_exact,
    type1_bound,
    type2_bound,
)
from etf_fingerprinting.analysis.bruteforce import (
    MAX_ENUMERATION,
    GuiltySetSpec,
    distance_exact_bruteforce,
    rip_delta_bruteforce,
)
from etf_fingerprinting.core.channel import wnr
from etf_fingerprinting.core.designs import welch_bound
from etf_fingerprinting.core.errors import CapacityError
from etf_fingerprinting.core.validators import require_int

logger = logging.getLogger(__name__)

SKIPPED_CAPACITY = "skipped (capacity)"
UNDEFINED_K = "undefined (K<2)"


def _delta_entry(F, K, max_enumeration):
    if K > F.M:
        return f"undefined ({K}>M)"
    try:
        return rip_delta_bruteforce(F, K, max_subsets=max_enumeration)
    except CapacityError:
        logger.info("delta_%d skipped: enumeration guard", K)
        return SKIPPED_CAPACITY


def analysis_report(F, K, per_dim_energy=1.0, sigma2=1.0, max_enumeration=MAX_ENUMERATION):
    """
    Ordered list of (name, value) pairs for the analyze command.

    delta_bruteforce_K is the exact RIP constant over K-column subsets and
    delta_bruteforce_2K over 2K-column subsets; dist_bound_rip uses the
    latter when it could be enumerated.
    """
    K = require_int(K, "K", minimum=1)
    b = bound_inputs_for(F, K, per_dim_energy, sigma2)
    entries = [
        ("design", F.kind),
        ("N", F.N),
        ("M", F.M),
        ("K", K),
        ("wnr_db", wnr(per_dim_energy, sigma2)),
        ("mu", F.coherence),
        ("welch_bound", welch_bound(F.N, F.M) if F.M > F.N else "undefined (M<=N)"),
    ]

    delta_gersh = gershgorin_delta_bound(F.coherence, K)
    delta_K = _delta_entry(F, K, max_enumeration)
    delta_2K = _delta_entry(F, 2 * K, max_enumeration)
    entries += [
        ("gershgorin_delta_2K", delta_gersh),
        ("delta_bruteforce_K", delta_K),
        ("delta_bruteforce_2K", delta_2K),
    ]

    if K < 2:
        entries += [
            ("dist_bound_rip", UNDEFINED_K),
            ("dist_bound_coherence", UNDEFINED_K),
            ("dist_bruteforce", UNDEFINED_K),
        ]
    else:
        if isinstance(delta_2K, float):
            entries.append(("dist_bound_rip", distance_lower_bound_rip(delta_2K, K)))
            entries.append(("dist_bound_rip_vacuous", is_vacuous(delta_2K)))
        else:
            entries.append(("dist_bound_rip", delta_2K))
        entries.append(("dist_bound_coherence", distance_lower_bound_coherence(F.coherence, K)))
        entries.append(("dist_bound_coherence_vacuous", is_vacuous(delta_gersh)))
        if F.kind == "simplex" and F.M >= 3 and K <= F.M - 1:
            entries.append(("dist_exact_simplex", simplex_distance_exact(F.M, K)))
        if K > F.M:
            entries.append(("dist_bruteforce", f"undefined ({K}>M)"))
        else:
            try:
                spec = GuiltySetSpec(F=F, m=0, K=K)
                entries.append(("dist_bruteforce",
                                distance_exact_bruteforce(spec, max_coalitions=max_enumeration)))
            except CapacityError:
                entries.append(("dist_bruteforce", SKIPPED_CAPACITY))

    tau_star = optimal_threshold(F.coherence, K)
    mm = minmax_bounds(b)
    entries += [
        ("tau_star", tau_star),
        ("type1_bound_tau_star", type1_bound(b, tau_star)),
        ("type2_bound_tau_star", type2_bound(b, tau_star)),
        ("minmax_lower", mm.lower if mm.lower is not None else UNDEFINED_K),
        ("minmax_upper", mm.upper),
        ("d_low", mm.d_low if mm.d_low is not None else UNDEFINED_K),
        ("d_up", mm.d_up),
        ("d_up_vacuous", mm.d_up_vacuous),
        ("d_orthogonal", mm.d_orthogonal),
        ("d_simplex", mm.d_simplex if mm.d_simplex is not None else "undefined (M<2)"),
        ("error_exponent", error_exponent(K)),
        ("ergun_scale", ergun_scale(F.N) if F.N >= 2 else "undefined (N<2)"),
    ]
    return entries


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def format_report(entries):
    """One ``name = value`` line per entry."""
    return "".join(f"{name} = {format_value(value)}\n" for name, value in entries)
