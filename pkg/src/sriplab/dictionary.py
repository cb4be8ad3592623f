"""Dictionaries on C(F_p) that are disjoint unions of orthonormal bases.

Atoms are addressed by :class:`AtomId` ``(basis, index)``. Two storage
strategies share one interface:

* :class:`DenseDictionary` keeps every basis as a ``(p, p)`` complex array.
* :class:`HeisenbergDictionary` evaluates chirp atoms on demand, so it stays
  cheap at p ~ 1000 where the dense form would need tens of gigabytes.
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from typing import NamedTuple

import numpy as np

ORTHO_TOL = 1e-10
LOAD_ORTHO_TOL = 1e-8
FILE_MAGIC = "SRIPDICT"
FILE_VERSION = "v1"


class InvalidPrimeError(ValueError):
    pass


class DictionaryValidationError(ValueError):
    def __init__(self, message, basis_index=None):
        super().__init__(message)
        self.basis_index = basis_index


class DictionaryFormatError(ValueError):
    """Malformed dictionary file; ``lineno`` is 1-based."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class AtomId(NamedTuple):
    basis: int
    index: int


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def check_prime(p) -> int:
    """Return ``p`` as an int if it is an odd prime, else raise."""
    if isinstance(p, bool) or int(p) != p:
        raise InvalidPrimeError(f"p must be an odd prime, got {p!r}")
    p = int(p)
    if p == 2 or not is_prime(p):
        raise InvalidPrimeError(f"p must be an odd prime, got {p}")
    return p


class Dictionary:
    """Common surface for union-of-ONB dictionaries.

    Subclasses provide ``p``, ``labels`` and :meth:`basis_matrix`; everything
    else is expressed through those.
    """

    p: int
    labels: tuple[str, ...]

    @property
    def n_bases(self) -> int:
        return len(self.labels)

    @property
    def n_atoms(self) -> int:
        return self.p * self.n_bases

    def __len__(self):
        return self.n_atoms

    def basis_matrix(self, b: int) -> np.ndarray:
        """``(p, p)`` array whose column ``i`` is atom ``(b, i)``."""
        raise NotImplementedError

    def check_id(self, atom) -> AtomId:
        try:
            b, i = atom
        except (TypeError, ValueError):
            raise ValueError(f"not an atom id: {atom!r}") from None
        if not (0 <= b < self.n_bases and 0 <= i < self.p):
            raise ValueError(
                f"invalid atom id {tuple(atom)!r} for dictionary with "
                f"{self.n_bases} bases and p={self.p}")
        return AtomId(int(b), int(i))

    def atom(self, atom) -> np.ndarray:
        b, i = self.check_id(atom)
        return self.basis_matrix(b)[:, i].copy()

    def atoms(self, ids: Sequence) -> np.ndarray:
        """``(p, len(ids))`` matrix with the requested atoms as columns."""
        out = np.empty((self.p, len(ids)), dtype=complex)
        for k, a in enumerate(ids):
            out[:, k] = self.atom(a)
        return out

    def matrix(self) -> np.ndarray:
        """The full ``p x |D|`` resolution matrix, bases in order."""
        return np.hstack([self.basis_matrix(b) for b in range(self.n_bases)])

    def analysis(self, y) -> np.ndarray:
        """Inner products ``<y, phi>`` for every atom, shape ``(n_bases, p)``."""
        y = np.asarray(y, dtype=complex)
        return np.stack([self.basis_matrix(b).conj().T @ y for b in range(self.n_bases)])

    def flat_index(self, atom) -> int:
        b, i = self.check_id(atom)
        return b * self.p + i

    def atom_id(self, flat: int) -> AtomId:
        b, i = divmod(int(flat), self.p)
        return self.check_id((b, i))

    def validate(self, tol=ORTHO_TOL):
        """Raise :class:`DictionaryValidationError` if some basis is not orthonormal."""
        eye = np.eye(self.p)
        for b in range(self.n_bases):
            B = self.basis_matrix(b)
            if B.shape != (self.p, self.p) or not np.all(np.isfinite(B)):
                raise DictionaryValidationError(
                    f"basis {b} ({self.labels[b]!r}) has bad shape or non-finite entries", b)
            err = np.max(np.abs(B.conj().T @ B - eye))
            if err > tol:
                raise DictionaryValidationError(
                    f"basis {b} ({self.labels[b]!r}) is not orthonormal: "
                    f"max |<u,v> - delta_uv| = {err:.3e} > {tol:g}", b)
        return self


class DenseDictionary(Dictionary):
    def __init__(self, p, bases, labels=None, *, validate=True, tol=ORTHO_TOL):
        self.p = check_prime(p)
        arr = np.array(bases, dtype=complex)
        if arr.ndim != 3 or arr.shape[1:] != (self.p, self.p):
            raise DictionaryValidationError(
                f"bases must have shape (m, {self.p}, {self.p}), got {arr.shape}")
        if arr.shape[0] == 0:
            raise DictionaryValidationError("dictionary needs at least one basis")
        arr.setflags(write=False)
        self._bases = arr
        if labels is None:
            labels = [f"basis {b}" for b in range(arr.shape[0])]
        if len(labels) != arr.shape[0]:
            raise DictionaryValidationError("one label per basis required")
        self.labels = tuple(str(s) for s in labels)
        if validate:
            self.validate(tol)

    def basis_matrix(self, b):
        return self._bases[b]

    def matrix(self):
        return np.hstack(list(self._bases))

    def analysis(self, y):
        y = np.asarray(y, dtype=complex)
        return np.einsum("bxi,x->bi", self._bases.conj(), y)

    def atoms(self, ids):
        ids = [self.check_id(a) for a in ids]
        if not ids:
            return np.empty((self.p, 0), dtype=complex)
        b, i = np.array(ids).T
        return self._bases[b, :, i].T.copy()


class HeisenbergDictionary(Dictionary):
    """Delta basis plus the ``p`` chirp bases ``b_a^t(x) = exp(2 pi i (a x^2 + t x)/p) / sqrt(p)``.

    Basis 0 is the delta basis, basis ``1 + a`` is the chirp basis with
    quadratic coefficient ``a``. Set ``include_delta=False`` to keep only the
    chirps (then basis ``a`` is chirp ``a``).
    """

    def __init__(self, p, include_delta=True):
        self.p = check_prime(p)
        self.include_delta = bool(include_delta)
        chirps = [f"chirp a={a}" for a in range(self.p)]
        self.labels = tuple((["delta"] if self.include_delta else []) + chirps)
        self._x = np.arange(self.p)

    def _chirp_a(self, b):
        return b - 1 if self.include_delta else b

    def _is_delta(self, b):
        return self.include_delta and b == 0

    def atom(self, atom):
        b, t = self.check_id(atom)
        if self._is_delta(b):
            v = np.zeros(self.p, dtype=complex)
            v[t] = 1.0
            return v
        a = self._chirp_a(b)
        x = self._x
        # reduce the phase mod p in exact integer arithmetic first
        k = (a * x * x + t * x) % self.p
        return np.exp(2j * np.pi * k / self.p) / math.sqrt(self.p)

    def basis_matrix(self, b):
        if not 0 <= b < self.n_bases:
            raise IndexError(f"basis index {b} out of range")
        if self._is_delta(b):
            return np.eye(self.p, dtype=complex)
        a = self._chirp_a(b)
        x = self._x[:, None]
        t = self._x[None, :]
        k = (a * x * x + t * x) % self.p
        return np.exp(2j * np.pi * k / self.p) / math.sqrt(self.p)

    def analysis(self, y):
        # <y, b_a^t> = p^{-1/2} sum_x y(x) e^{-2 pi i a x^2/p} e^{-2 pi i t x/p}
        y = np.asarray(y, dtype=complex)
        p = self.p
        x = self._x
        a = np.arange(p)[:, None]
        q = (a * x[None, :] ** 2) % p
        rows = np.fft.fft(y[None, :] * np.exp(-2j * np.pi * q / p), axis=1) / math.sqrt(p)
        if self.include_delta:
            rows = np.vstack([y[None, :], rows])
        return rows

    def to_dense(self) -> DenseDictionary:
        return DenseDictionary(self.p, [self.basis_matrix(b) for b in range(self.n_bases)],
                               self.labels, validate=False)


def build_heisenberg(p, include_delta=True) -> HeisenbergDictionary:
    """Heisenberg chirp dictionary: ``p + 1`` mutually unbiased bases, ``p(p+1)`` atoms."""
    return HeisenbergDictionary(p, include_delta=include_delta)


def build_random_onb_union(p, m, seed) -> DenseDictionary:
    """``m`` random orthonormal bases from QR of seeded complex Gaussian matrices."""
    p = check_prime(p)
    if int(m) < 1:
        raise ValueError(f"number of bases must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    bases = []
    for _ in range(int(m)):
        z = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
        q, r = np.linalg.qr(z)
        # fix the column phases so the result is Haar and reproducible
        d = np.diag(r)
        q = q * (d / np.abs(d))[None, :]
        bases.append(q)
    labels = [f"random u={u}" for u in range(int(m))]
    return DenseDictionary(p, bases, labels)


def coherence(d: Dictionary) -> float:
    """``sqrt(p) * max |<phi, psi>|`` over distinct atoms (0 for a single atom)."""
    if d.n_atoms < 2:
        return 0.0
    mat = d.matrix()
    g = np.abs(mat.conj().T @ mat)
    np.fill_diagonal(g, 0.0)
    return float(math.sqrt(d.p) * g.max())


def resolution_apply(d: Dictionary, f: Mapping) -> np.ndarray:
    """Synthesis map: ``sum_phi f(phi) phi`` for a sparse coefficient mapping."""
    out = np.zeros(d.p, dtype=complex)
    for key, c in f.items():
        try:
            a = d.check_id(key)
        except ValueError as exc:
            raise ValueError(f"coefficient vector has invalid atom id {key!r}: {exc}") from None
        if c != 0:
            out += c * d.atom(a)
    return out


def coefficient_support(f: Mapping) -> set:
    return {AtomId(*k) for k, v in f.items() if abs(v) > 0}


def gauss_sum_magnitude(a: int, b: int, p: int) -> float:
    """``|sum_x exp(2 pi i (a x^2 + b x)/p)|`` by direct summation."""
    p = check_prime(p)
    if a % p == 0:
        raise ValueError("quadratic coefficient a must be nonzero mod p")
    x = np.arange(p)
    k = (a * x * x + b * x) % p
    return float(abs(np.exp(2j * np.pi * k / p).sum()))


def _fmt_complex(z) -> str:
    return f"{float(z.real)!r}:{float(z.imag)!r}"


def save_dictionary(d: Dictionary, path) -> None:
    """Write ``d`` in the text format documented in the README.

    Each basis is a label line followed by ``p`` atom lines; an atom line
    holds the ``p`` coordinates as ``re:im`` pairs in shortest round-trip
    decimal.
    """
    lines = [f"{FILE_MAGIC} {FILE_VERSION} p={d.p} bases={d.n_bases}"]
    for b in range(d.n_bases):
        lines.append(f"basis {b} {d.labels[b]}")
        B = d.basis_matrix(b)
        for i in range(d.p):
            lines.append(" ".join(_fmt_complex(z) for z in B[:, i]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_header(line):
    parts = line.split()
    if len(parts) != 4 or parts[0] != FILE_MAGIC:
        raise DictionaryFormatError(f"expected '{FILE_MAGIC} v1 p=<p> bases=<m>' header", 1)
    if parts[1] != FILE_VERSION:
        raise DictionaryFormatError(f"unsupported version {parts[1]!r}", 1)
    try:
        key_p, p = parts[2].split("=")
        key_m, m = parts[3].split("=")
        if key_p != "p" or key_m != "bases":
            raise ValueError
        return int(p), int(m)
    except ValueError:
        raise DictionaryFormatError("bad p=/bases= fields in header", 1) from None


def _parse_complex(tok, lineno):
    try:
        re_s, im_s = tok.split(":")
        return complex(float(re_s), float(im_s))
    except ValueError:
        raise DictionaryFormatError(f"bad complex entry {tok!r}", lineno) from None


def load_dictionary(path, tol=LOAD_ORTHO_TOL) -> DenseDictionary:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DictionaryFormatError("empty file", 1)
    p, m = _parse_header(lines[0])
    if m < 1:
        raise DictionaryFormatError("bases must be >= 1", 1)
    try:
        p = check_prime(p)
    except InvalidPrimeError as exc:
        raise DictionaryFormatError(str(exc), 1) from None
    expected = 1 + m * (p + 1)
    if len(lines) < expected:
        raise DictionaryFormatError(
            f"truncated file: expected {expected} lines, found {len(lines)}", len(lines) + 1)
    if any(s.strip() for s in lines[expected:]):
        raise DictionaryFormatError("trailing content after last basis", expected + 1)
    bases = np.empty((m, p, p), dtype=complex)
    labels = []
    ln = 1
    for b in range(m):
        head = lines[ln]
        ln += 1
        parts = head.split(maxsplit=2)
        if len(parts) < 2 or parts[0] != "basis" or parts[1] != str(b):
            raise DictionaryFormatError(f"expected label line 'basis {b} <label>'", ln)
        labels.append(parts[2] if len(parts) == 3 else "")
        for i in range(p):
            toks = lines[ln].split()
            ln += 1
            if len(toks) != p:
                raise DictionaryFormatError(f"expected {p} entries, found {len(toks)}", ln)
            bases[b, :, i] = [_parse_complex(t, ln) for t in toks]
    return DenseDictionary(p, bases, labels, validate=True, tol=tol)


def all_atom_ids(d: Dictionary) -> Iterable[AtomId]:
    for b in range(d.n_bases):
        for i in range(d.p):
            yield AtomId(b, i)
