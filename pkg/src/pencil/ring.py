"""Exact arithmetic in Z_t (t = 2**ell), fixed-point encoding and additive
secret sharing of tensors.

All residues live in numpy uint64 arrays.  Because t divides 2**64, addition,
subtraction and multiplication may run on native wraparound and be masked to
ell bits afterwards; the mask is applied eagerly so every stored element is a
canonical residue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EncodeRangeError, ScaleError, ShapeError

MO = "mo"
DO = "do"

U64 = np.uint64


@dataclass(frozen=True)
class RingParams:
    """Plaintext ring Z_{2**ell} with f fraction bits of fixed-point scale."""

    ell: int = 59
    f: int = 25

    def __post_init__(self):
        if not (1 <= self.f and 2 * self.f < self.ell <= 62):
            raise ValueError(f"need 1 <= f, 2f < ell <= 62, got ell={self.ell} f={self.f}")

    @property
    def t(self) -> int:
        return 1 << self.ell

    @property
    def mask(self) -> U64:
        return U64((1 << self.ell) - 1)

    @property
    def headroom(self) -> int:
        return self.ell - 2 * self.f


class SeededRng:
    """Counter-based (Philox) randomness; (seed, stream) fully determine the
    output, so protocol transcripts are replayable from recorded seeds."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self._gen = np.random.Generator(np.random.Philox(key=[self.seed, self.stream]))

    def child(self, stream: int) -> "SeededRng":
        return SeededRng(self.seed, stream)

    def uniform_ring(self, shape, params: RingParams) -> np.ndarray:
        return self._gen.integers(0, params.t, size=shape, dtype=np.uint64)

    def uniform_mod(self, shape, mod: int) -> np.ndarray:
        return self._gen.integers(0, mod, size=shape, dtype=np.uint64)

    def nonzero_ring(self, shape, params: RingParams) -> np.ndarray:
        out = self._gen.integers(1, params.t, size=shape, dtype=np.uint64)
        return out

    def ternary(self, shape) -> np.ndarray:
        """Values in {-1, 0, 1} as int64."""
        return self._gen.integers(-1, 2, size=shape, dtype=np.int64)

    def cbd(self, shape, eta: int = 20) -> np.ndarray:
        """Centered binomial, variance eta/2 (eta=20 gives sigma ~ 3.16)."""
        a = self._gen.binomial(eta, 0.5, size=shape).astype(np.int64)
        b = self._gen.binomial(eta, 0.5, size=shape).astype(np.int64)
        return a - b

    def normal(self, shape, std: float) -> np.ndarray:
        return self._gen.normal(0.0, std, size=shape)

    def bits(self, shape) -> np.ndarray:
        return self._gen.integers(0, 2, size=shape, dtype=np.uint8)

    def bytes(self, n: int) -> bytes:
        return self._gen.bytes(n)

    def shuffled(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


class RingTensor:
    """A shaped array of Z_t residues carrying a fixed-point scale exponent."""

    __slots__ = ("values", "scale", "params")

    def __init__(self, values: np.ndarray, scale: int, params: RingParams):
        values = np.asarray(values, dtype=np.uint64)
        self.values = values & params.mask
        self.scale = int(scale)
        self.params = params

    @property
    def shape(self):
        return self.values.shape

    @property
    def data(self) -> np.ndarray:
        return self.values.ravel()

    def copy(self) -> "RingTensor":
        return RingTensor(self.values.copy(), self.scale, self.params)

    def reshape(self, *shape) -> "RingTensor":
        return RingTensor(self.values.reshape(*shape), self.scale, self.params)

    def decode(self) -> np.ndarray:
        return decode_fixed(self.values, self.params, self.scale)

    def with_scale(self, scale: int) -> "RingTensor":
        return RingTensor(self.values, scale, self.params)

    def _check(self, other: "RingTensor"):
        if self.params != other.params:
            raise ScaleError("ring parameter mismatch")
        if self.scale != other.scale:
            raise ScaleError(f"scale mismatch: {self.scale} vs {other.scale}")
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other: "RingTensor") -> "RingTensor":
        self._check(other)
        return RingTensor(self.values + other.values, self.scale, self.params)

    def __sub__(self, other: "RingTensor") -> "RingTensor":
        self._check(other)
        return RingTensor(self.values - other.values, self.scale, self.params)

    def __neg__(self) -> "RingTensor":
        return RingTensor(np.uint64(0) - self.values, self.scale, self.params)

    def scalar_mul(self, k: int) -> "RingTensor":
        """Multiply by a plain ring scalar; the scale is unchanged."""
        return RingTensor(self.values * U64(k & int(self.params.mask)), self.scale, self.params)

    def __repr__(self):
        return f"RingTensor(shape={self.shape}, scale={self.scale}, ell={self.params.ell})"


class ShareTensor:
    """One party's additive share of a logically shared RingTensor."""

    __slots__ = ("owner_role", "value")

    def __init__(self, owner_role: str, value: RingTensor):
        if owner_role not in (MO, DO):
            raise ValueError(f"unknown role {owner_role!r}")
        self.owner_role = owner_role
        self.value = value

    @property
    def scale(self) -> int:
        return self.value.scale

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"ShareTensor({self.owner_role}, shape={self.shape}, scale={self.scale})"


def encode_fixed(x, params: RingParams, scale: int | None = None):
    """floor(x * 2**scale) embedded two's-complement into Z_{2**ell}."""
    scale = params.f if scale is None else scale
    x = np.asarray(x, dtype=np.float64)
    limit = float(1 << (params.ell - 1)) / float(1 << scale)
    if np.any(np.abs(x) >= limit):
        raise EncodeRangeError(f"|x| must stay below {limit}")
    v = np.floor(x * float(1 << scale)).astype(np.int64)
    return v.astype(np.uint64) & params.mask


def decode_fixed(v, params: RingParams, scale: int | None = None):
    """Interpret residues in (-2**(ell-1), 2**(ell-1)] and divide by 2**scale."""
    scale = params.f if scale is None else scale
    v = np.asarray(v, dtype=np.uint64) & params.mask
    half = np.uint64(1 << (params.ell - 1))
    signed = v.astype(np.int64) - ((v >= half).astype(np.int64) << np.int64(params.ell))
    return signed.astype(np.float64) / float(1 << scale)


def to_signed(v: np.ndarray, params: RingParams) -> np.ndarray:
    """Centered representative in (-2**(ell-1), 2**(ell-1)] as int64."""
    v = np.asarray(v, dtype=np.uint64) & params.mask
    half = np.uint64(1 << (params.ell - 1))
    return v.astype(np.int64) - ((v >= half).astype(np.int64) << np.int64(params.ell))


def encode_tensor(x, params: RingParams, scale: int | None = None) -> RingTensor:
    scale = params.f if scale is None else scale
    return RingTensor(encode_fixed(x, params, scale), scale, params)


def arith_shift(x: RingTensor, bits: int) -> RingTensor:
    """Exact arithmetic right shift of the plaintext (sign-extending); drops
    `bits` from the scale.  Only valid on revealed values, never on shares."""
    signed = to_signed(x.values, x.params)
    shifted = signed >> np.int64(bits)
    return RingTensor(shifted.astype(np.uint64), x.scale - bits, x.params)


def share_tensor(x: RingTensor, rng: SeededRng) -> tuple[ShareTensor, ShareTensor]:
    """Split into (MO share, DO share); the MO share is uniform in Z_t."""
    r = rng.uniform_ring(x.shape, x.params)
    mo = RingTensor(r, x.scale, x.params)
    do = RingTensor(x.values - r, x.scale, x.params)
    return ShareTensor(MO, mo), ShareTensor(DO, do)


def reconstruct_tensor(a: ShareTensor, b: ShareTensor) -> RingTensor:
    if a.owner_role == b.owner_role:
        raise ValueError("reconstruction needs one share from each role")
    return a.value + b.value


def zeros_like(x: RingTensor) -> RingTensor:
    return RingTensor(np.zeros(x.shape, dtype=np.uint64), x.scale, x.params)


def zero_share(role: str, shape, scale: int, params: RingParams) -> ShareTensor:
    return ShareTensor(role, RingTensor(np.zeros(shape, dtype=np.uint64), scale, params))
