"""Complexes, linkage classes, deficiency, and the per-step change audit.

The deficiency of a network is delta = n - ell - s: complexes minus
linkage classes minus the rank of the stoichiometric matrix.  A fixing
step changes s by exactly one, and its effect on n and ell is captured
by two small case functions (phi for new complexes, psi for new linkage
classes) evaluated on the step's cast of characters: the fresh species
B', the rewritten product B' + C2, and the restored complex p2*B.
``delta_audit`` computes phi/psi literally from their case definitions
and cross-checks them against from-scratch recounts of both networks;
a mismatch means the implementation is wrong, not the input.

Also here: the decomposition S v(x) = Y A_k psi(x) of the right-hand
side through complex space (Y lists complex coefficients, A_k is the
rate-weighted Laplacian of the reaction graph on complexes).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, List, Sequence, Tuple

import numpy as np

from . import exactla
from .kinetics import MassActionSystem
from .model import Complex, Network, RationalMatrix, stoichiometric_matrix
from .signcheck import find_bad_submatrices
from .signfix import FixReport


def complexes_of(net: Network) -> List[Complex]:
    """Distinct complexes in first-appearance order (reactant, product)."""
    seen: Dict[Complex, None] = {}
    for reaction in net.reactions:
        seen.setdefault(reaction.reactant)
        seen.setdefault(reaction.product)
    return list(seen)


def _linkage_classes(net: Network, complexes: Sequence[Complex]) -> List[FrozenSet[int]]:
    """Connected components of the graph with one edge per reaction.

    A reversible pair contributes the same undirected edge twice, which
    changes nothing.  Components are ordered by smallest member.
    """
    index = {c: i for i, c in enumerate(complexes)}
    parent = list(range(len(complexes)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for reaction in net.reactions:
        ra, rb = find(index[reaction.reactant]), find(index[reaction.product])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    groups: Dict[int, List[int]] = {}
    for i in range(len(complexes)):
        groups.setdefault(find(i), []).append(i)
    return [frozenset(members) for _, members in sorted(groups.items())]


@dataclass(frozen=True)
class DeficiencyReport:
    """Complex count n, linkage classes ell, rank s, and delta = n - ell - s."""

    n: int
    ell: int
    s: int
    delta: int
    complexes: Tuple[Complex, ...]
    classes: Tuple[FrozenSet[int], ...]


def deficiency(net: Network) -> DeficiencyReport:
    complexes = complexes_of(net)
    classes = _linkage_classes(net, complexes)
    s = exactla.rank(stoichiometric_matrix(net))
    n, ell = len(complexes), len(classes)
    return DeficiencyReport(
        n=n,
        ell=ell,
        s=s,
        delta=n - ell - s,
        complexes=tuple(complexes),
        classes=tuple(classes),
    )


@dataclass(frozen=True)
class DeltaAudit:
    """Per-step deficiency bookkeeping.

    phi_values = (phi(B'+C2), phi(p2*B)) counts new complexes;
    psi_values = (psi([B'+C2]), psi([B'])) counts new linkage classes.
    """

    dn: int
    dl: int
    ds: int
    ddelta: int
    phi_values: Tuple[int, int]
    psi_values: Tuple[int, int]


def _class_of(classes: Sequence[FrozenSet[int]], index: int) -> FrozenSet[int]:
    for members in classes:
        if index in members:
            return members
    raise AssertionError("complex missing from its own linkage partition")


def delta_audit(report: FixReport) -> List[DeltaAudit]:
    """Replay a fixing run and audit each step's deficiency change.

    For every step, phi and psi are evaluated verbatim from their case
    definitions, and independently n and ell of both networks are
    recounted from scratch; Delta-n must equal the phi sum and Delta-ell
    the psi sum.  Each step must also satisfy ds = 1, 1 <= dn <= 3,
    dl <= 2, and 0 <= ddelta <= 1.

    Raises:
        AssertionError: on any disagreement (internal-consistency
            failure, not an input error).
    """
    audits: List[DeltaAudit] = []
    for step, before, after in zip(report.steps, report.networks, report.networks[1:]):
        pre = deficiency(before)
        post = deficiency(after)
        dn = post.n - pre.n
        dl = post.ell - pre.ell
        ds = post.s - pre.s
        ddelta = post.delta - pre.delta

        q, p2 = step.zeroed_entry
        p2b = Complex.from_dict({q: p2})
        rewritten_product = after.reactions[step.modified_column].product
        c2_terms = {
            j: c for j, c in rewritten_product.terms if j != step.added_species_index
        }
        c2_nonempty = bool(c2_terms)
        old_product = before.reactions[step.modified_column].product
        if old_product != Complex.from_dict({**c2_terms, q: p2}):
            raise AssertionError("step does not describe the replayed rewrite")

        pre_complexes = set(pre.complexes)
        post_complexes = set(post.complexes)
        post_index = {c: i for i, c in enumerate(post.complexes)}

        phi_rewritten = (
            2 if c2_nonempty and old_product in post_complexes else 1
        )
        phi_restored = 1 if p2b not in pre_complexes else 0

        bprime_class = _class_of(post.classes, post_index[rewritten_product])
        if old_product in post_complexes:
            disjoint = not (
                bprime_class & _class_of(post.classes, post_index[old_product])
            )
            psi_rewritten = 1 if disjoint else 0
        else:
            psi_rewritten = 0
        psi_fresh = 1 if (p2b not in pre_complexes and c2_nonempty) else 0

        if dn != phi_rewritten + phi_restored:
            raise AssertionError(
                f"complex count changed by {dn} but phi predicts "
                f"{phi_rewritten + phi_restored}"
            )
        if dl != psi_rewritten + psi_fresh:
            raise AssertionError(
                f"linkage count changed by {dl} but psi predicts "
                f"{psi_rewritten + psi_fresh}"
            )
        if ds != 1:
            raise AssertionError(f"rank changed by {ds}, expected exactly 1")
        if not (1 <= dn <= 3 and dl <= 2 and 0 <= ddelta <= 1):
            raise AssertionError(
                f"step deltas out of range: dn={dn}, dl={dl}, ddelta={ddelta}"
            )
        audits.append(
            DeltaAudit(dn, dl, ds, ddelta, (phi_rewritten, phi_restored),
                       (psi_rewritten, psi_fresh))
        )
    return audits


def check_single_positive_column(net: Network) -> bool:
    """True iff every bad class's column has exactly one positive entry.

    When true, a full fixing run leaves the deficiency unchanged (the
    test suite asserts that consequence on every such network).
    Vacuously true without bad classes.
    """
    S = stoichiometric_matrix(net)
    for cls in find_bad_submatrices(S):
        _, ell = cls.positive_entry
        positives = sum(1 for i in range(S.rows) if S[i, ell] > 0)
        if positives != 1:
            return False
    return True


def complexes_decomposition(
    sys: MassActionSystem,
) -> Tuple[RationalMatrix, np.ndarray, Callable[[Sequence[float]], np.ndarray]]:
    """Factor the right-hand side as S v(x) = Y A_k psi(x).

    Y is the species-by-complexes coefficient matrix, psi(x) the vector
    of complex monomials psi(x)_c = prod_j x_j^Y[j,c], and A_k the
    rate-weighted Laplacian sum of k_r (e_product - e_reactant)
    e_reactant^t over reactions r (so its columns sum to zero).
    """
    net = sys.network
    complexes = complexes_of(net)
    index = {c: i for i, c in enumerate(complexes)}
    y_rows = [
        [complexes[c].coefficient(j) for c in range(len(complexes))]
        for j in range(net.species_count)
    ]
    Y = RationalMatrix(y_rows)

    a_k = np.zeros((len(complexes), len(complexes)))
    for r, reaction in enumerate(net.reactions):
        src = index[reaction.reactant]
        dst = index[reaction.product]
        a_k[dst, src] += sys.rates[r]
        a_k[src, src] -= sys.rates[r]

    y_float = np.array(Y.to_float_rows())

    def psi(x: Sequence[float]) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.shape != (net.species_count,):
            raise ValueError(f"state must have {net.species_count} coordinates")
        out = np.ones(len(complexes))
        for c in range(len(complexes)):
            for j in range(net.species_count):
                e = y_float[j, c]
                if e:
                    out[c] *= arr[j] ** e
        return out

    return Y, a_k, psi


def decomposition_residual(sys: MassActionSystem, x: Sequence[float]) -> float:
    """Relative max-norm gap between S v(x) and Y A_k psi(x)."""
    from .kinetics import rhs

    Y, a_k, psi = complexes_decomposition(sys)
    lhs = rhs(sys, x)
    produced = np.array(Y.to_float_rows()) @ (a_k @ psi(x))
    scale = 1.0 + float(np.max(np.abs(lhs)))
    return float(np.max(np.abs(lhs - produced))) / scale
