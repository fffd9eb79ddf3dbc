"""Circular fingerprints and Tanimoto similarity."""

from __future__ import annotations

from dataclasses import dataclass

from .. import _kernels
from ..errors import AlgorithmMismatch
from ..molgraph.model import Molecule

WIDTH = 2048
RADIUS = 2
ALGORITHM_ID = f"fnv1a64-morgan-r{RADIUS}-{WIDTH}-v1"


@dataclass(frozen=True)
class Fingerprint:
    bits: int  # bit i set <=> feature i present
    width: int = WIDTH
    radius: int = RADIUS
    algorithm_id: str = ALGORITHM_ID

    def __post_init__(self) -> None:
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError("bits outside the fingerprint width")

    @classmethod
    def from_indices(cls, indices, **kw) -> "Fingerprint":
        bits = 0
        for i in indices:
            bits |= 1 << i
        return cls(bits, **kw)

    @property
    def popcount(self) -> int:
        return self.bits.bit_count()

    def on_bits(self) -> list[int]:
        out, bits, i = [], self.bits, 0
        while bits:
            if bits & 1:
                out.append(i)
            bits >>= 1
            i += 1
        return out

    def to_hex(self) -> str:
        return format(self.bits, f"0{self.width // 4}x")

    def to_dict(self) -> dict:
        return {"algorithm_id": self.algorithm_id, "width": self.width, "on_bits": self.on_bits()}


def _word(value: int) -> int:
    return value & 0xFFFFFFFFFFFFFFFF


def atom_invariants(mol: Molecule) -> list[int]:
    return [
        _kernels.fnv1a64(
            [
                _word(a.atomic_number),
                _word(mol.degree(i)),
                _word(a.formal_charge),
                _word(a.total_h),
                int(mol.in_ring[i]),
                int(a.aromatic),
            ]
        )
        for i, a in enumerate(mol.atoms)
    ]


def morgan_fingerprint(mol: Molecule, radius: int = RADIUS, width: int = WIDTH) -> Fingerprint:
    """Hash every radius-0..``radius`` neighbourhood and fold modulo ``width``."""
    if not mol.atoms:
        return Fingerprint(0, width, radius, f"fnv1a64-morgan-r{radius}-{width}-v1")
    indptr, nbrs, codes = mol.csr
    hashes = _kernels.morgan_environments(atom_invariants(mol), indptr, nbrs, codes, radius)
    bits = 0
    for h in hashes:
        bits |= 1 << (h % width)
    return Fingerprint(bits, width, radius, f"fnv1a64-morgan-r{radius}-{width}-v1")


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a AND b| / |a OR b|; two empty fingerprints are identical (1.0)."""
    if a.algorithm_id != b.algorithm_id or a.width != b.width:
        raise AlgorithmMismatch(
            f"cannot compare {a.algorithm_id}/{a.width} with {b.algorithm_id}/{b.width}",
            left=a.algorithm_id,
            right=b.algorithm_id,
        )
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union
