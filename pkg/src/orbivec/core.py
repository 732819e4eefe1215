"""Simplicial complexes carrying cyclic isotropy labelings.

A labeled complex is the combinatorial presentation of a closed cyclic
orbifold: every simplex carries the order of the cyclic isotropy group on
its open stratum, and every (simplex, facet) incidence carries a unit that
encodes the injective homomorphism identifying the smaller group inside the
larger one.  All invariants are exact: integer Euler characteristics and
`fractions.Fraction` Euler-Satake characteristics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

Simplex = tuple[int, ...]


class ComplexError(ValueError):
    """A complex or labeling cannot be constructed from the given data."""


def normalize_unit(unit: int, order: int) -> int:
    """Reduce a unit into the canonical range 1..order (1 when order is 1)."""
    if order <= 0:
        raise ComplexError(f"order must be positive, got {order}")
    return (unit - 1) % order + 1


def as_simplex(vertices: Iterable[int]) -> Simplex:
    """Canonicalize a vertex collection into a sorted, duplicate-free tuple."""
    vs = tuple(sorted(vertices))
    if not vs:
        raise ComplexError("a simplex needs at least one vertex")
    if any(v < 0 for v in vs):
        raise ComplexError(f"negative vertex index in {vs}")
    if len(set(vs)) != len(vs):
        raise ComplexError(f"duplicate vertices in simplex {vs}")
    return vs


class SimplicialComplex:
    """A finite, face-closed set of simplices over vertices 0..vertex_count-1.

    Simplices are sorted vertex tuples held in a fixed order; the position of
    a simplex in that order is its id.  Ids are what the labeling and the
    sector machinery key on.
    """

    def __init__(
        self,
        vertex_count: int,
        simplices: Sequence[Simplex],
        *,
        _trusted: bool = False,
        _maximal_ids: np.ndarray | None = None,
        _dims: np.ndarray | None = None,
        _first_vertex: np.ndarray | None = None,
    ):
        if _trusted:
            self.vertex_count = vertex_count
            self.simplices: tuple[Simplex, ...] = tuple(simplices)
        else:
            canon = sorted({as_simplex(s) for s in simplices}, key=lambda s: (len(s), s))
            top = max((s[-1] for s in canon), default=-1)
            if vertex_count < top + 1:
                raise ComplexError(
                    f"vertex_count {vertex_count} too small for vertex {top}"
                )
            self.vertex_count = vertex_count
            self.simplices = tuple(canon)
            present = set(self.simplices)
            for s in self.simplices:
                if len(s) > 1:
                    for facet in combinations(s, len(s) - 1):
                        if facet not in present:
                            raise ComplexError(f"missing face {facet} of {s}")
        self._index: dict[Simplex, int] | None = None
        self._dims = _dims
        self._first_vertex = _first_vertex
        self._maximal_ids = _maximal_ids
        self._vertex_components: np.ndarray | None = None

    # -- basic accessors ---------------------------------------------------

    def __len__(self) -> int:
        return len(self.simplices)

    def __contains__(self, simplex: Iterable[int]) -> bool:
        try:
            return tuple(sorted(simplex)) in self.index
        except TypeError:
            return False

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return (
            self.vertex_count == other.vertex_count
            and set(self.simplices) == set(other.simplices)
        )

    def __hash__(self) -> int:
        return hash((self.vertex_count, frozenset(self.simplices)))

    def __repr__(self) -> str:
        return (
            f"SimplicialComplex(vertices={self.vertex_count}, "
            f"simplices={len(self.simplices)}, dim={self.dimension})"
        )

    @property
    def index(self) -> dict[Simplex, int]:
        if self._index is None:
            self._index = {s: i for i, s in enumerate(self.simplices)}
        return self._index

    def id_of(self, simplex: Iterable[int]) -> int:
        key = tuple(sorted(simplex))
        try:
            return self.index[key]
        except KeyError:
            raise ComplexError(f"{key} is not a simplex of this complex") from None

    @property
    def dims(self) -> np.ndarray:
        """dim of each simplex, by id."""
        if self._dims is None:
            self._dims = np.fromiter(
                (len(s) - 1 for s in self.simplices), dtype=np.int8, count=len(self.simplices)
            )
        return self._dims

    @property
    def first_vertex(self) -> np.ndarray:
        if self._first_vertex is None:
            self._first_vertex = np.fromiter(
                (s[0] for s in self.simplices), dtype=np.int64, count=len(self.simplices)
            )
        return self._first_vertex

    @property
    def dimension(self) -> int:
        return int(self.dims.max()) if len(self.simplices) else -1

    def facet_ids(self, sid: int) -> list[int]:
        """Ids of the codimension-1 faces of simplex `sid`."""
        s = self.simplices[sid]
        if len(s) == 1:
            return []
        idx = self.index
        return [idx[facet] for facet in combinations(s, len(s) - 1)]

    @property
    def maximal_ids(self) -> np.ndarray:
        """Ids of simplices that are not a proper face of another simplex."""
        if self._maximal_ids is None:
            covered = np.zeros(len(self.simplices), dtype=bool)
            idx = self.index
            for s in self.simplices:
                if len(s) > 1:
                    for facet in combinations(s, len(s) - 1):
                        covered[idx[facet]] = True
            self._maximal_ids = np.nonzero(~covered)[0]
        return self._maximal_ids

    def maximal_simplices(self) -> list[Simplex]:
        return [self.simplices[int(i)] for i in self.maximal_ids]

    # -- connectivity --------------------------------------------------------

    @property
    def vertex_components(self) -> np.ndarray:
        """Connected-component label per vertex (labels are 0..k-1, ordered
        by smallest member vertex)."""
        if self._vertex_components is None:
            parent = list(range(self.vertex_count))

            def find(x: int) -> int:
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            dims = self.dims
            for sid in np.nonzero(dims == 1)[0]:
                a, b = self.simplices[int(sid)]
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
            labels = np.empty(self.vertex_count, dtype=np.int64)
            seen: dict[int, int] = {}
            for v in range(self.vertex_count):
                r = find(v)
                if r not in seen:
                    seen[r] = len(seen)
                labels[v] = seen[r]
            self._vertex_components = labels
        return self._vertex_components

    @property
    def component_count(self) -> int:
        if self.vertex_count == 0:
            return 0
        return int(self.vertex_components.max()) + 1

    def simplex_components(self) -> np.ndarray:
        """Connected-component label per simplex id."""
        if len(self.simplices) == 0:
            return np.zeros(0, dtype=np.int64)
        return self.vertex_components[self.first_vertex]

    # -- Euler characteristic ------------------------------------------------

    def euler_characteristic(self, ids: Iterable[int] | None = None) -> int:
        dims = self.dims
        if ids is None:
            signs = 1 - 2 * (dims.astype(np.int64) & 1)
            return int(signs.sum())
        total = 0
        for i in ids:
            total += -1 if (int(dims[i]) & 1) else 1
        return total


def build_complex(maximal_simplices: Iterable[Iterable[int]]) -> SimplicialComplex:
    """Face closure of the given simplices, in canonical (dim, lex) order."""
    tops = [as_simplex(s) for s in maximal_simplices]
    if not tops:
        raise ComplexError("need at least one simplex")
    closed: set[Simplex] = set()
    for s in tops:
        for k in range(1, len(s) + 1):
            closed.update(combinations(s, k))
    ordered = sorted(closed, key=lambda s: (len(s), s))
    n_vertices = max(s[-1] for s in ordered) + 1
    return SimplicialComplex(n_vertices, ordered, _trusted=True)


@dataclass(frozen=True)
class FaceRestriction:
    """A unit u encoding the monomorphism Z_{m_from} -> Z_{m_to} attached to
    a (simplex, facet) incidence: the generator maps to u * (m_to / m_from).
    """

    from_simplex: Simplex
    to_simplex: Simplex
    unit: int


class CyclicLabeling:
    """Isotropy orders per simplex plus units per facet incidence.

    Orders default to 1, units default to 1; only nontrivial units are
    stored.  The labeling is tied to one complex and indexes by simplex id.
    """

    def __init__(
        self,
        complex: SimplicialComplex,
        orders: Mapping[Simplex, int] | Sequence[int] | None = None,
        units: Mapping[tuple[Simplex, Simplex], int] | None = None,
        *,
        _order_array: np.ndarray | None = None,
        _unit_map: dict[tuple[int, int], int] | None = None,
    ):
        self.complex = complex
        n = len(complex.simplices)
        if _order_array is not None:
            self.orders = _order_array
        else:
            arr = np.ones(n, dtype=np.int64)
            if orders is not None:
                if isinstance(orders, Mapping):
                    for simplex, m in orders.items():
                        if m < 1:
                            raise ComplexError(f"order must be >= 1, got {m} on {simplex}")
                        arr[complex.id_of(simplex)] = m
                else:
                    if len(orders) != n:
                        raise ComplexError("order sequence length mismatch")
                    arr = np.asarray(orders, dtype=np.int64)
                    if (arr < 1).any():
                        raise ComplexError("orders must be >= 1")
            self.orders = arr
        if _unit_map is not None:
            self.units = _unit_map
        else:
            self.units = {}
            if units:
                for (sfrom, sto), u in units.items():
                    fid = complex.id_of(sfrom)
                    tid = complex.id_of(sto)
                    if u < 1:
                        raise ComplexError(f"unit must be >= 1, got {u}")
                    s, t = complex.simplices[fid], complex.simplices[tid]
                    if len(t) != len(s) - 1 or not set(t) <= set(s):
                        raise ComplexError(f"{t} is not a facet of {s}")
                    nu = normalize_unit(u, int(self.orders[fid]))
                    if nu != 1:
                        self.units[(fid, tid)] = nu

    def order_of(self, simplex: Iterable[int] | int) -> int:
        sid = simplex if isinstance(simplex, (int, np.integer)) else self.complex.id_of(simplex)
        return int(self.orders[sid])

    def unit(self, from_id: int, to_id: int) -> int:
        return self.units.get((from_id, to_id), 1)

    def restrictions(self) -> Iterator[FaceRestriction]:
        """All stored (nontrivial) facet restrictions, deterministically."""
        simp = self.complex.simplices
        for (fid, tid) in sorted(self.units):
            yield FaceRestriction(simp[fid], simp[tid], self.units[(fid, tid)])

    def is_trivial(self) -> bool:
        return bool((self.orders == 1).all()) and not self.units


class OrbifoldComplex:
    """A simplicial complex together with its cyclic isotropy labeling."""

    def __init__(self, complex: SimplicialComplex, labeling: CyclicLabeling):
        if labeling.complex is not complex:
            raise ComplexError("labeling belongs to a different complex")
        self.complex = complex
        self.labeling = labeling
        self._memo: dict[str, object] = {}

    @classmethod
    def trivial(cls, complex: SimplicialComplex) -> "OrbifoldComplex":
        return cls(complex, CyclicLabeling(complex))

    @classmethod
    def from_data(
        cls,
        maximal_simplices: Iterable[Iterable[int]],
        orders: Mapping[Simplex, int] | None = None,
        units: Mapping[tuple[Simplex, Simplex], int] | None = None,
    ) -> "OrbifoldComplex":
        complex = build_complex(maximal_simplices)
        return cls(complex, CyclicLabeling(complex, orders, units))

    def __repr__(self) -> str:
        return f"OrbifoldComplex({self.complex!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OrbifoldComplex):
            return NotImplemented
        if self.complex != other.complex:
            return False
        remap = {s: int(other.labeling.orders[other.complex.id_of(s)]) for s in self.complex.simplices}
        ours = {s: int(self.labeling.orders[i]) for i, s in enumerate(self.complex.simplices)}
        if ours != remap:
            return False
        def unit_set(oc: "OrbifoldComplex") -> set[tuple[Simplex, Simplex, int]]:
            return {
                (r.from_simplex, r.to_simplex, r.unit) for r in oc.labeling.restrictions()
            }
        return unit_set(self) == unit_set(other)

    def __hash__(self) -> int:
        return hash(self.complex)

    @property
    def is_reduced(self) -> bool:
        """True when the generic (maximal) strata carry trivial isotropy."""
        mx = self.complex.maximal_ids
        return bool((self.labeling.orders[mx] == 1).all())

    @property
    def validated(self) -> "ValidationReport":
        """Cached lax-mode validation report."""
        if "validated" not in self._memo:
            self._memo["validated"] = validate(self)
        return self._memo["validated"]  # type: ignore[return-value]


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    code: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.location}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    strict: bool
    findings: tuple[Finding, ...]

    @property
    def is_valid(self) -> bool:
        return not self.findings

    def codes(self) -> set[str]:
        return {f.code for f in self.findings}


def validate(oc: OrbifoldComplex, strict: bool = False) -> ValidationReport:
    """Check the labeling axioms; in strict mode also the closed
    pseudomanifold structure of the underlying complex.

    Violations are findings, not exceptions: divisibility of orders along
    face incidences, coprimality of units, and agreement of the two facet
    compositions around every (simplex, codimension-2 face) diamond.
    """
    K = oc.complex
    lab = oc.labeling
    findings: list[Finding] = []
    orders = lab.orders
    idx = K.index
    for sid, s in enumerate(K.simplices):
        m_s = int(orders[sid])
        if len(s) == 1:
            continue
        for facet in combinations(s, len(s) - 1):
            tid = idx[facet]
            m_t = int(orders[tid])
            if m_t % m_s != 0:
                findings.append(
                    Finding(
                        "divisibility",
                        f"{s}->{facet}",
                        f"order {m_s} does not divide face order {m_t}",
                    )
                )
            u = lab.unit(sid, tid)
            if not (1 <= u <= max(m_s, 1)) or math.gcd(u, m_s) != 1:
                findings.append(
                    Finding(
                        "unit",
                        f"{s}->{facet}",
                        f"unit {u} is not coprime to order {m_s}",
                    )
                )
        if len(s) >= 3:
            # diamond: dropping v then w must agree with dropping w then v
            for v, w in combinations(s, 2):
                rho1 = tuple(x for x in s if x != v)
                rho2 = tuple(x for x in s if x != w)
                tau = tuple(x for x in s if x != v and x != w)
                u1 = lab.unit(idx[rho1], idx[tau]) * lab.unit(sid, idx[rho1])
                u2 = lab.unit(idx[rho2], idx[tau]) * lab.unit(sid, idx[rho2])
                if (u1 - u2) % m_s != 0:
                    findings.append(
                        Finding(
                            "diamond",
                            f"{s}->{tau}",
                            f"facet compositions disagree: {u1} vs {u2} (mod {m_s})",
                        )
                    )
    if strict and len(K.simplices):
        dims = K.dims
        top = int(dims.max())
        for mid in K.maximal_ids:
            if int(dims[mid]) != top:
                findings.append(
                    Finding(
                        "pure",
                        str(K.simplices[int(mid)]),
                        f"maximal simplex of dimension {int(dims[mid])} < {top}",
                    )
                )
        if top >= 1:
            cofacet_count = np.zeros(len(K.simplices), dtype=np.int64)
            for sid in np.nonzero(dims == top)[0]:
                for tid in K.facet_ids(int(sid)):
                    cofacet_count[tid] += 1
            for tid in np.nonzero(dims == top - 1)[0]:
                c = int(cofacet_count[tid])
                if c != 2:
                    findings.append(
                        Finding(
                            "pseudomanifold",
                            str(K.simplices[int(tid)]),
                            f"codimension-1 simplex lies in {c} top simplices (want 2)",
                        )
                    )
    return ValidationReport(strict=strict, findings=tuple(findings))


# -- restriction of group elements --------------------------------------------


def composite_unit(oc: OrbifoldComplex, from_id: int, to_id: int) -> int:
    """Unit of the composed restriction along a descending facet chain from
    `from_id` to any face `to_id`; path independence is the diamond axiom."""
    K = oc.complex
    lab = oc.labeling
    s = K.simplices[from_id]
    t = K.simplices[to_id]
    if not set(t) <= set(s):
        raise ComplexError(f"{t} is not a face of {s}")
    m_s = int(lab.orders[from_id])
    u = 1
    cur = s
    cur_id = from_id
    for v in sorted(set(s) - set(t)):
        nxt = tuple(x for x in cur if x != v)
        nxt_id = K.id_of(nxt)
        u = (u * lab.unit(cur_id, nxt_id)) % m_s if m_s > 1 else 1
        cur, cur_id = nxt, nxt_id
    return normalize_unit(u, m_s)


def restrict_element(
    oc: OrbifoldComplex,
    simplex: Iterable[int] | int,
    face: Iterable[int] | int,
    g: int,
) -> int:
    """Image of g under the restriction Z_{m_simplex} -> Z_{m_face}."""
    K = oc.complex
    sid = simplex if isinstance(simplex, (int, np.integer)) else K.id_of(simplex)
    tid = face if isinstance(face, (int, np.integer)) else K.id_of(face)
    m_s = int(oc.labeling.orders[sid])
    m_t = int(oc.labeling.orders[tid])
    if not (0 <= g < m_s):
        raise ComplexError(f"element {g} out of range for order {m_s}")
    if m_t % m_s != 0:
        raise ComplexError("restriction undefined: orders do not divide")
    u = composite_unit(oc, int(sid), int(tid))
    return (u * g * (m_t // m_s)) % m_t


# -- exact invariants ----------------------------------------------------------


def euler_characteristic(
    obj: SimplicialComplex | OrbifoldComplex, ids: Iterable[int] | None = None
) -> int:
    """Alternating simplex count of a complex (or of a subset of ids)."""
    K = obj.complex if isinstance(obj, OrbifoldComplex) else obj
    return K.euler_characteristic(ids)


def euler_satake(oc: OrbifoldComplex, ids: Iterable[int] | None = None) -> Fraction:
    """Exact alternating sum of 1/order over the simplices (or a subset)."""
    K = oc.complex
    orders = oc.labeling.orders
    dims = K.dims
    total = Fraction(0)
    if ids is None:
        # bucket by (order, parity): one Fraction per distinct order
        for m in np.unique(orders):
            mask = orders == m
            odd = int((dims[mask] & 1).sum())
            even = int(mask.sum()) - odd
            total += Fraction(even - odd, int(m))
    else:
        for i in ids:
            sign = -1 if (int(dims[i]) & 1) else 1
            total += Fraction(sign, int(orders[i]))
    return total


# -- barycentric subdivision ---------------------------------------------------


def barycentric_subdivide(oc: OrbifoldComplex) -> OrbifoldComplex:
    """Barycentric subdivision with the labeling transported stratum-wise.

    Vertices of the subdivision are the original simplex ids; simplices are
    ascending chains of proper faces.  A chain inherits the order of its top
    simplex (its interior lies in that simplex's open stratum).  Dropping the
    top of a chain crosses into the stratum of the second-largest member, so
    that facet carries the composed unit of the original restriction between
    the two; every other facet stays in the same stratum (unit 1).
    """
    K = oc.complex
    lab = oc.labeling
    n = len(K.simplices)
    idx = K.index
    orders = lab.orders

    chains_by_top: list[list[tuple[int, ...]]] = [[] for _ in range(n)]
    new_simplices: list[tuple[int, ...]] = []
    new_dims: list[int] = []
    new_first: list[int] = []
    new_orders: list[int] = []
    new_maximal: list[int] = []
    support_index: dict[tuple[int, ...], int] = {}

    maximal = set(int(i) for i in K.maximal_ids)
    dims = K.dims
    for sid, s in enumerate(K.simplices):
        mine = chains_by_top[sid]
        if len(s) > 1:
            for k in range(1, len(s)):
                for face in combinations(s, k):
                    for c in chains_by_top[idx[face]]:
                        mine.append(c + (sid,))
        mine.append((sid,))
        m_top = int(orders[sid])
        is_max = sid in maximal
        full_len = int(dims[sid]) + 1
        base = len(new_simplices)
        new_simplices.extend(mine)
        for j, c in enumerate(mine):
            lc = len(c)
            new_dims.append(lc - 1)
            new_first.append(c[0])
            new_orders.append(m_top)
            if is_max and lc == full_len:
                new_maximal.append(base + j)
            if m_top > 1:
                support_index[c] = base + j

    new_units: dict[tuple[int, int], int] = {}
    for c, cid in support_index.items():
        if len(c) < 2:
            continue
        u = composite_unit(oc, c[-1], c[-2])
        if u != 1:
            new_units[(cid, support_index[c[:-1]])] = u

    sub = SimplicialComplex(
        n,
        new_simplices,
        _trusted=True,
        _maximal_ids=np.asarray(new_maximal, dtype=np.int64),
        _dims=np.asarray(new_dims, dtype=np.int8),
        _first_vertex=np.asarray(new_first, dtype=np.int64),
    )
    sub_lab = CyclicLabeling(
        sub,
        _order_array=np.asarray(new_orders, dtype=np.int64),
        _unit_map=new_units,
    )
    return OrbifoldComplex(sub, sub_lab)
