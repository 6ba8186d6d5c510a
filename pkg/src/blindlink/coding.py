"""Vandermonde secrecy codes across q frequency subchannels.

Two variants share one generator matrix G (q x q Vandermonde):

* ``Scheme.PADDED`` sends one message symbol together with q - 1 uniform
  random pads, ``X = G @ (M, T_1, ..., T_{q-1})``.  Any q - 1 observed
  symbols are independent of M.
* ``Scheme.FULL_RATE`` replaces the pads by further message symbols.  Each
  individual message symbol stays hidden from any q - 1 observations as
  long as the messages are uniformly distributed; that uniformity is the
  caller's responsibility.

Leakage is certified by exhaustive enumeration with integer counts, so a
zero result is exact rather than a small float.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import ArityError, EncodingError, InsufficientObservations, TooLarge
from .field import FieldElement, FieldMatrix, PrimeField, invert, rank, vandermonde

ENUMERATION_BUDGET = 10**7


class Scheme(enum.IntEnum):
    PADDED = 1
    FULL_RATE = 2

    @classmethod
    def parse(cls, value) -> Scheme:
        if isinstance(value, Scheme):
            return value
        text = str(value).strip().lower()
        aliases = {"1": cls.PADDED, "scheme1": cls.PADDED, "padded": cls.PADDED,
                   "2": cls.FULL_RATE, "scheme2": cls.FULL_RATE, "full_rate": cls.FULL_RATE}
        if text not in aliases:
            raise ValueError(f"unknown scheme {value!r}")
        return aliases[text]


class SecrecyCode:
    """q-channel Vandermonde code over a prime field.

    Parameters
    ----------
    field : PrimeField or int
        Symbol alphabet.
    q : int
        Number of subchannels (and encoded symbols per use).
    scheme : Scheme
        Padded (one message per use) or full-rate (q messages per use).
    points : sequence of int, optional
        Distinct nonzero evaluation points; defaults to 1..q.
    """

    def __init__(self, field: PrimeField | int, q: int, scheme: Scheme | int = Scheme.PADDED,
                 points: Sequence[int] | None = None):
        self.field = field if isinstance(field, PrimeField) else PrimeField(field)
        self.q = int(q)
        self.scheme = Scheme.parse(scheme)
        self.generator = vandermonde(self.field, self.q, points)
        self.decoder = invert(self.generator)
        self._gen = np.array(self.generator.values(), dtype=np.int64)
        self._dec = np.array(self.decoder.values(), dtype=np.int64)

    def __repr__(self):
        return f"SecrecyCode(p={self.field.p}, q={self.q}, scheme={self.scheme.name})"

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def messages_per_use(self) -> int:
        return 1 if self.scheme is Scheme.PADDED else self.q

    def message_indices(self) -> tuple[int, ...]:
        return tuple(range(self.messages_per_use))

    def apply(self, inputs: np.ndarray, rows: Sequence[int] | None = None) -> np.ndarray:
        """Multiply each row of ``inputs`` (shape (n, q)) by the generator, mod p."""
        gen = self._gen if rows is None else self._gen[list(rows)]
        return _matmul_mod(np.asarray(inputs, dtype=np.int64), gen.T, self.p)

    def unapply(self, codewords: np.ndarray) -> np.ndarray:
        return _matmul_mod(np.asarray(codewords, dtype=np.int64), self._dec.T, self.p)


def _matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    # reduce after every product so p < 2**31 never overflows int64
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for k in range(a.shape[1]):
        out = (out + (a[:, k:k + 1] * b[k:k + 1, :]) % p) % p
    return out


@dataclass(frozen=True)
class Codeword:
    symbols: tuple[FieldElement, ...]
    present: tuple[bool, ...]

    def __post_init__(self):
        if len(self.symbols) != len(self.present):
            raise ArityError(f"mask length {len(self.present)} != {len(self.symbols)} symbols")

    @property
    def q(self) -> int:
        return len(self.symbols)

    @property
    def erased(self) -> int:
        return sum(not b for b in self.present)

    def values(self) -> list[int]:
        return [s.value for s in self.symbols]

    def masked(self, present: Sequence[bool]) -> Codeword:
        present = tuple(bool(b) for b in present)
        return Codeword(self.symbols, tuple(a and b for a, b in zip(self.present, present)))


def _codeword(code: SecrecyCode, values: Iterable[int]) -> Codeword:
    symbols = tuple(FieldElement(int(v), code.field) for v in values)
    return Codeword(symbols, (True,) * len(symbols))


def _coerce(code: SecrecyCode, values: Sequence) -> list[int]:
    return [code.field(v).value for v in values]


def encode_scheme1(code: SecrecyCode, message, pads: Sequence) -> Codeword:
    """Encode one message symbol with q - 1 explicit random pads."""
    if len(pads) != code.q - 1:
        raise ArityError(f"expected {code.q - 1} pads, got {len(pads)}")
    u = [code.field(message).value] + _coerce(code, pads)
    return _codeword(code, (code.generator @ u))


def decode_scheme1(code: SecrecyCode, cw: Codeword) -> tuple[FieldElement, tuple[FieldElement, ...]]:
    """Recover ``(message, pads)`` from a fully observed codeword."""
    u = _decode(code, cw)
    return u[0], tuple(u[1:])


def encode_scheme2(code: SecrecyCode, messages: Sequence) -> Codeword:
    if len(messages) != code.q:
        raise ArityError(f"expected {code.q} message symbols, got {len(messages)}")
    return _codeword(code, code.generator @ _coerce(code, messages))


def decode_scheme2(code: SecrecyCode, cw: Codeword) -> tuple[FieldElement, ...]:
    return tuple(_decode(code, cw))


def _decode(code: SecrecyCode, cw: Codeword) -> list[FieldElement]:
    if cw.q != code.q:
        raise ArityError(f"codeword has {cw.q} symbols, code expects {code.q}")
    if cw.erased:
        raise InsufficientObservations(cw.erased)
    return code.decoder @ cw.symbols


def encode(code: SecrecyCode, data: Sequence, pads: Sequence = ()) -> Codeword:
    """Scheme-dispatching single-codeword encoder."""
    if code.scheme is Scheme.PADDED:
        return encode_scheme1(code, data, pads)
    return encode_scheme2(code, data)


def efficiency(code: SecrecyCode) -> Fraction:
    """Message symbols delivered per transmitted symbol."""
    return Fraction(code.messages_per_use, code.q)


# -- streams ----------------------------------------------------------------

def encode_stream(code: SecrecyCode, symbols: Sequence[int], rng: np.random.Generator | None = None
                  ) -> tuple[np.ndarray, int]:
    """Encode a stream of message symbols into an (n, q) array of codewords.

    Padded scheme: one codeword per symbol, pads drawn uniformly from ``rng``.
    Full-rate scheme: symbols are grouped q at a time and the final group is
    filled with zeros.  Returns the codewords and the number of fill symbols.
    """
    sym = np.asarray(list(symbols), dtype=np.int64).reshape(-1)
    if sym.size and (sym.min() < 0 or sym.max() >= code.p):
        raise EncodingError(f"message symbols must lie in [0, {code.p})")
    if code.scheme is Scheme.PADDED:
        rng = rng if rng is not None else np.random.default_rng()
        pads = rng.integers(0, code.p, size=(sym.size, code.q - 1), dtype=np.int64)
        inputs = np.column_stack([sym, pads]) if sym.size else np.zeros((0, code.q), dtype=np.int64)
        return code.apply(inputs), 0
    fill = (-sym.size) % code.q
    inputs = np.concatenate([sym, np.zeros(fill, dtype=np.int64)]).reshape(-1, code.q)
    return code.apply(inputs), fill


def decode_stream(code: SecrecyCode, codewords: np.ndarray, fill: int = 0) -> list[int]:
    cw = np.asarray(codewords, dtype=np.int64).reshape(-1, code.q)
    u = code.unapply(cw)
    if code.scheme is Scheme.PADDED:
        return u[:, 0].tolist()
    flat = u.reshape(-1).tolist()
    return flat[: len(flat) - fill] if fill else flat


# -- leakage ----------------------------------------------------------------

@dataclass(frozen=True)
class LeakageReport:
    """Exact leakage of a target message set through an observed channel subset.

    ``joint_factorizes`` is decided on integer counts; ``mutual_information_bits``
    is forced to exactly ``0.0`` in that case.
    """

    observed_subset: tuple[int, ...]
    target: tuple[int, ...]
    mutual_information_bits: float
    joint_factorizes: bool
    tuples_enumerated: int = 0
    target_entropy_bits: float = dc_field(default=0.0)
    method: str = "enumeration"

    @property
    def exact_zero(self) -> bool:
        return self.joint_factorizes

    def summary(self) -> str:
        if self.joint_factorizes:
            return "I = 0 (exact)"
        return f"I = {self.mutual_information_bits:.12g} bits"


def _resolve_target(code: SecrecyCode, target) -> tuple[int, ...]:
    if target is None or (isinstance(target, str) and target.lower() in ("all", "full", "vector")):
        return code.message_indices()
    if isinstance(target, int):
        idx = (target,)
    else:
        idx = tuple(int(t) for t in target)
    for t in idx:
        if t not in code.message_indices():
            raise ValueError(f"message index {t} not carried by {code!r}")
    return idx


def _mixed_radix(values: np.ndarray, p: int) -> np.ndarray:
    key = np.zeros(values.shape[0], dtype=np.int64)
    for col in range(values.shape[1]):
        key = key * p + values[:, col]
    return key


def exact_mutual_information(code: SecrecyCode, observed_subset: Iterable[int], target=None) -> LeakageReport:
    """Exhaustively compute I(target; observed symbols).

    All p**q input tuples are enumerated: message symbols and pads uniform and
    independent.  ``target`` is a message index, a tuple of indices, or
    ``None``/``"all"`` for every message symbol the scheme carries.
    """
    subset = tuple(sorted(set(int(i) for i in observed_subset)))
    if any(not 0 <= i < code.q for i in subset):
        raise ValueError(f"channel indices {subset} out of range for q={code.q}")
    tgt = _resolve_target(code, target)
    p, q = code.p, code.q
    total = p**q
    if total > ENUMERATION_BUDGET:
        raise TooLarge(f"{p}**{q} = {total} tuples exceeds the enumeration budget {ENUMERATION_BUDGET}")

    grid = np.indices((p,) * q, dtype=np.int64).reshape(q, -1).T
    t_key = _mixed_radix(grid[:, list(tgt)], p)
    if subset:
        o_key = _mixed_radix(code.apply(grid, rows=subset), p)
    else:
        o_key = np.zeros(total, dtype=np.int64)

    t_vals, t_inv, t_counts = np.unique(t_key, return_inverse=True, return_counts=True)
    o_vals, o_inv, o_counts = np.unique(o_key, return_inverse=True, return_counts=True)
    cell = t_inv.astype(np.int64) * len(o_vals) + o_inv
    cells, j_counts = np.unique(cell, return_counts=True)
    ti = cells // len(o_vals)
    oi = cells % len(o_vals)
    mt = t_counts[ti]
    mo = o_counts[oi]

    # independence holds iff every (t, o) pair occurs and N * joint == marginal product
    factorizes = len(cells) == len(t_vals) * len(o_vals) and bool(np.all(j_counts * total == mt * mo))
    if factorizes:
        mi = 0.0
    else:
        pj = j_counts / total
        mi = float(np.sum(pj * np.log2(j_counts * total / (mt.astype(float) * mo))))
        mi = max(mi, 0.0)
    h_t = float(-np.sum((t_counts / total) * np.log2(t_counts / total)))
    return LeakageReport(subset, tgt, mi, factorizes, total, h_t)


def rank_mutual_information(code: SecrecyCode, observed_subset: Iterable[int], target=None) -> LeakageReport:
    """Exact leakage from ranks, for fields too large to enumerate.

    With the inputs uniform on F_p^q, the observation is ``A u`` and the
    target ``E u`` for selector rows ``E``, and a linear image of a uniform
    vector is uniform on its range.  Hence
    ``I = (rank E + rank A - rank [A; E]) log2 p`` and independence is the
    integer identity ``rank [A; E] = rank A + rank E``.
    """
    subset = tuple(sorted(set(int(i) for i in observed_subset)))
    if any(not 0 <= i < code.q for i in subset):
        raise ValueError(f"channel indices {subset} out of range for q={code.q}")
    tgt = _resolve_target(code, target)
    observed = code.generator.select_rows(subset).values()
    selector = [[1 if j == t else 0 for j in range(code.q)] for t in tgt]
    r_obs = rank(FieldMatrix(code.field, observed)) if observed else 0
    r_tgt = len(tgt)
    r_both = rank(FieldMatrix(code.field, observed + selector))
    excess = r_tgt + r_obs - r_both
    bits = excess * math.log2(code.p)
    return LeakageReport(subset, tgt, bits, excess == 0, 0, r_tgt * math.log2(code.p), "rank")


def certify_leakage(code: SecrecyCode, observed_subset: Iterable[int], target=None) -> LeakageReport:
    """Enumerate when the field is small enough, otherwise fall back to the rank identity."""
    if code.p**code.q <= ENUMERATION_BUDGET:
        return exact_mutual_information(code, observed_subset, target)
    return rank_mutual_information(code, observed_subset, target)


def worst_individual_leakage(code: SecrecyCode, observed_subset: Iterable[int]) -> LeakageReport:
    """Largest single-symbol leakage over every message index the code carries."""
    observed_subset = list(observed_subset)
    reports = [certify_leakage(code, observed_subset, k) for k in code.message_indices()]
    return max(reports, key=lambda r: (not r.joint_factorizes, r.mutual_information_bits))


# -- bit packing --------------------------------------------------------------

def bits_per_symbol(field: PrimeField | int) -> int:
    """floor(log2 p): the largest block length that maps injectively into F_p."""
    p = field.p if isinstance(field, PrimeField) else int(field)
    return p.bit_length() - 1


def _bits(bitstream) -> list[int]:
    if isinstance(bitstream, str):
        text = bitstream.replace("_", "").replace(" ", "")
        if set(text) - {"0", "1"}:
            raise EncodingError("bit strings may only contain 0 and 1")
        return [int(c) for c in text]
    out = [int(b) for b in bitstream]
    if any(b not in (0, 1) for b in out):
        raise EncodingError("bits must be 0 or 1")
    return out


def pack_bits(bitstream, field: PrimeField | int) -> tuple[list[int], int]:
    """Split bits MSB-first into blocks of floor(log2 p) and read each as a symbol.

    The final block is right-padded with zeros; the pad length is returned
    alongside the symbols and must be handed back to :func:`unpack_symbols`.
    """
    k = bits_per_symbol(field)
    bits = _bits(bitstream)
    pad = (-len(bits)) % k
    bits = bits + [0] * pad
    symbols = [int("".join(map(str, bits[i:i + k])), 2) for i in range(0, len(bits), k)]
    return symbols, pad


def unpack_symbols(symbols: Sequence[int], field: PrimeField | int, pad: int = 0) -> list[int]:
    k = bits_per_symbol(field)
    out: list[int] = []
    for s in symbols:
        s = int(s)
        if not 0 <= s < 2**k:
            raise EncodingError(f"symbol {s} does not fit in a {k}-bit block")
        out.extend(int(c) for c in format(s, f"0{k}b"))
    if pad:
        if pad > len(out):
            raise EncodingError("pad length exceeds the unpacked stream")
        out = out[: len(out) - pad]
    return out


# -- text serialization -------------------------------------------------------

def format_codeword(values: Sequence[int], present: Sequence[bool] | None = None) -> str:
    """``X1,X2,...,Xq;mask`` with mask a bitstring (1 = observed)."""
    present = [True] * len(values) if present is None else present
    return ",".join(str(int(v)) for v in values) + ";" + "".join("1" if b else "0" for b in present)


def parse_codeword(line: str, field: PrimeField | int) -> Codeword:
    field = field if isinstance(field, PrimeField) else PrimeField(field)
    try:
        sym_text, mask = line.strip().split(";")
        values = [int(v) for v in sym_text.split(",")]
    except ValueError as exc:
        raise EncodingError(f"malformed codeword line {line!r}") from exc
    if len(mask) != len(values) or set(mask) - {"0", "1"}:
        raise EncodingError(f"mask {mask!r} does not match {len(values)} symbols")
    if any(not 0 <= v < field.p for v in values):
        raise EncodingError(f"symbol out of range for F_{field.p} in {line!r}")
    return Codeword(tuple(FieldElement(v, field) for v in values), tuple(c == "1" for c in mask))


def write_codewords(stream, codewords: np.ndarray, masks: np.ndarray | None = None,
                    header: dict | None = None) -> None:
    for key, value in (header or {}).items():
        stream.write(f"# {key}={value}\n")
    for i, row in enumerate(np.asarray(codewords)):
        mask = None if masks is None else np.asarray(masks)[i] if np.ndim(masks) == 2 else masks
        stream.write(format_codeword(row, mask) + "\n")


def read_codewords(stream, field: PrimeField | int) -> tuple[list[Codeword], dict[str, str]]:
    header: dict[str, str] = {}
    words = []
    for line in stream:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            header[key.strip()] = value.strip()
            continue
        words.append(parse_codeword(line, field))
    return words, header
