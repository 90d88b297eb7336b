"""Average pooling and convolution on amplitude-encoded images.

An N x N grayscale image (N a power of two) lives in two registers of
log2(N) qubits: the state carries amplitude v_{x,y} / Omega on |x>|y>,
with the row index x on the first register. SUBTRACT_k on an axis
register maps that state to the encoding of the image shifted by k along
the axis, so a uniform linear combination of shift pairs averages every
pixel with its D x D window (wrapping around the grid edge). One ancilla
register per axis drives the combination; each ancilla qubit controls a
single shift, which keeps the controlled-gate count logarithmic in D.
"""
from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .lcu import LcuOutcome, LcuProgram, run_lcu
from .sim import (
    ControlledGate,
    DenseGate,
    GateAction,
    GateSequence,
    PermutationGate,
    PostSelectionImpossible,
    RegisterLayout,
    Statevector,
)

_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)

ZERO_HIGH_SHIFTS = "zero_high_shifts"
ADJUSTED_FINAL = "adjusted_final"


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """Square grayscale image with nonnegative pixel values.

    ``original_extent`` remembers the pre-padding side length so border
    logic (zero padding, flag discard) knows where the real image ends;
    zero means the whole grid is real.
    """

    pixels: np.ndarray
    original_extent: int = 0

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=float)
        if pixels.ndim != 2 or pixels.shape[0] != pixels.shape[1] or pixels.shape[0] < 1:
            raise ValueError(f"pixel array must be square, got shape {pixels.shape}")
        if not np.all(np.isfinite(pixels)) or np.any(pixels < 0):
            raise ValueError("pixel values must be finite and nonnegative")
        extent = self.original_extent or pixels.shape[0]
        if not 1 <= extent <= pixels.shape[0]:
            raise ValueError("original extent outside the pixel grid")
        object.__setattr__(self, "pixels", pixels)
        object.__setattr__(self, "original_extent", int(extent))

    @property
    def n_side(self) -> int:
        return self.pixels.shape[0]

    @property
    def norm_constant(self) -> float:
        return float(np.linalg.norm(self.pixels))


@dataclass(frozen=True)
class PoolingSpec:
    """Averaging window of side ``d``; stride is fixed at one."""

    d: int
    mode: str = "periodic"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("window side must be >= 1")
        if self.mode not in ("periodic", "zero_padded"):
            raise ValueError(f"unknown boundary mode {self.mode!r}")


@dataclass(frozen=True, eq=False)
class FilterSpec:
    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
            raise ValueError("filter must be a square matrix")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ValueError("filter weights must be finite and nonnegative")
        if not np.any(weights > 0):
            raise ValueError("filter needs at least one nonzero weight")
        object.__setattr__(self, "weights", weights)

    @property
    def d(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class ShiftOp:
    """Cyclic add/subtract by ``amount`` on one axis register of ``width`` qubits."""

    register: str
    amount: int
    direction: str
    width: int

    def __post_init__(self):
        if self.register not in ("x", "y"):
            raise ValueError(f"unknown register {self.register!r}")
        if self.direction not in ("add", "subtract"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.width < 1:
            raise ValueError("register needs at least one qubit")
        if not 0 <= self.amount < 2 ** self.width:
            raise ValueError("shift amount outside the register range")


def next_power_of_two(n: int) -> int:
    assert n >= 1
    return 1 << (n - 1).bit_length()


def embed_image(img: ImageGrid, side: int) -> ImageGrid:
    """Zero-pad into a ``side x side`` grid, keeping the image in the top-left
    corner and remembering its original extent."""
    if side < img.n_side:
        raise ValueError("cannot embed into a smaller grid")
    pixels = np.zeros((side, side))
    pixels[: img.n_side, : img.n_side] = img.pixels
    return ImageGrid(pixels, original_extent=img.original_extent)


def image_layout(n_side_bits: int) -> RegisterLayout:
    return RegisterLayout((("x", 0, n_side_bits), ("y", n_side_bits, 2 * n_side_bits)))


def amplitude_encode_image(img: ImageGrid) -> Statevector:
    """Encode pixel values as amplitudes: |x>|y> carries v_{x,y} / Omega."""
    side = max(2, next_power_of_two(img.n_side))  # at least one qubit per axis
    if side != img.n_side:
        img = embed_image(img, side)
    omega = img.norm_constant
    if omega <= 0.0:
        raise ValueError("cannot encode an all-zero image")
    return Statevector(img.pixels.reshape(-1) / omega)


def classical_conv_oracle(img: ImageGrid, filt: FilterSpec, mode: str = "periodic") -> ImageGrid:
    """Reference result v'_{i,j} = (1/D^2) sum_{dx,dy} w_{dx,dy} v_{i+dx,j+dy},
    with indices wrapped (periodic) or out-of-range pixels read as zero."""
    assert mode in ("periodic", "zero_padded")
    if filt.d > img.n_side:
        raise ValueError("window larger than the image")
    v = img.pixels
    n = img.n_side
    out = np.zeros_like(v)
    for dx in range(filt.d):
        for dy in range(filt.d):
            w = filt.weights[dx, dy]
            if w == 0.0:
                continue
            if mode == "periodic":
                shifted = np.roll(np.roll(v, -dx, axis=0), -dy, axis=1)
            else:
                shifted = np.zeros_like(v)
                shifted[: n - dx, : n - dy] = v[dx:, dy:]
            out += w * shifted
    return ImageGrid(out / filt.d ** 2, original_extent=img.original_extent)


def classical_pool_oracle(img: ImageGrid, spec: PoolingSpec) -> ImageGrid:
    ones = FilterSpec(np.ones((spec.d, spec.d)))
    return classical_conv_oracle(img, ones, spec.mode)


def shift_operator(op: ShiftOp) -> GateAction:
    """Basis permutation for the shift. The x register occupies qubits
    [0, width) and the y register the next block of the same width."""
    dim = 2 ** op.width
    step = op.amount if op.direction == "add" else -op.amount
    table = (np.arange(dim) + step) % dim
    offset = 0 if op.register == "x" else op.width
    return PermutationGate(tuple(range(offset, offset + op.width)), table)


def lower_increment_circuit(width: int) -> tuple:
    """Add-1 as a cascade of multi-controlled X gates.

    Qubit 0 is the register's most significant bit. Working top down, each
    target flips when every less significant bit is 1; a gate's controls are
    still untouched when it fires, so no borrow bookkeeping is needed.
    Control fan-in runs width-1, width-2, ..., 0.
    """
    assert width >= 1
    gates = []
    for target in range(width):
        controls = tuple(range(target + 1, width))
        x_gate = DenseGate((target,), _X)
        if controls:
            gates.append(ControlledGate(controls, (1,) * len(controls), x_gate))
        else:
            gates.append(x_gate)
    return tuple(gates)


def lower_decrement_circuit(width: int) -> tuple:
    # every cascade gate is self-adjoint, so reversing the list inverts it
    return tuple(reversed(lower_increment_circuit(width)))


def lowered_subtract_power(width: int, power: int) -> tuple:
    """SUBTRACT_{2^power} as a decrement cascade on the top width - power
    qubits; the low bits never borrow."""
    assert 0 <= power < width
    return lower_decrement_circuit(width - power)


def basic_operation_count(gates) -> int:
    """Cost model: a gate with f controls counts as f + 1 basic operations,
    so a width-w cascade costs w(w+1)/2 <= w**2."""
    total = 0
    for gate in gates:
        total += len(gate.controls) + 1 if isinstance(gate, ControlledGate) else 1
    return total


def ancilla_bits_for_window(d: int) -> int:
    assert d >= 1
    return (d - 1).bit_length()


def shift_amounts(d: int, l: int, scheme: str = ZERO_HIGH_SHIFTS) -> tuple:
    """Subtraction amount controlled by the ancilla bit of significance s.

    The default keeps the powers of two 1, 2, ..., 2^(l-1). The alternative
    replaces the top amount with d - 2^(l-1), which covers 0..d-1 with at
    most a two-fold degeneracy per composed shift.
    """
    if l < 0 or d < 1 or d > 2 ** l or (l > 0 and d <= 2 ** (l - 1)):
        raise ValueError(f"window {d} does not need {l} ancilla bits")
    if scheme == ZERO_HIGH_SHIFTS or l == 0:
        return tuple(2 ** s for s in range(l))
    if scheme == ADJUSTED_FINAL:
        return tuple(2 ** s for s in range(l - 1)) + (d - 2 ** (l - 1),)
    raise ValueError(f"unknown degeneracy scheme {scheme!r}")


def composed_shift(ancilla_state: int, amounts: tuple) -> int:
    total = 0
    for s, amount in enumerate(amounts):
        if ancilla_state >> s & 1:
            total += amount
    return total


def prep_amplitudes_degeneracy_free(d: int, l: int, scheme: str = ZERO_HIGH_SHIFTS) -> np.ndarray:
    """Ancilla amplitudes whose squared weights put exactly 1/d on each shift.

    Every composed shift in 0..d-1 keeps its lowest-index ancilla state;
    states that would duplicate a shift (or overshoot d-1) get amplitude
    zero.
    """
    amounts = shift_amounts(d, l, scheme)
    amps = np.zeros(2 ** l)
    seen = set()
    for state in range(2 ** l):
        shift = composed_shift(state, amounts)
        if shift < d and shift not in seen:
            seen.add(shift)
            amps[state] = 1.0
    assert len(seen) == d  # both schemes reach every window offset exactly once
    return amps / np.sqrt(d)


def pool_control_counts(d: int) -> dict:
    """Controlled-gate budget: one singly-controlled shift per ancilla qubit
    per axis, versus one multi-controlled shift per window offset pair."""
    return {"controlled_per_axis": ancilla_bits_for_window(d),
            "multi_controlled_baseline": d * d}


def build_pool_program(spec: PoolingSpec, n_side_bits: int,
                       scheme: str = ZERO_HIGH_SHIFTS) -> LcuProgram:
    """LCU program for a D x D averaging window on a 2^bits square grid.

    One ancilla register of ceil(log2 D) qubits per axis (x group in front);
    ancilla basis state (jx, jy) selects the composed shift pair, so the
    effective operator is the uniform average of all D^2 window offsets.
    """
    d = spec.d
    if d > 2 ** n_side_bits:
        raise ValueError("window larger than the image")
    l = ancilla_bits_for_window(d)
    if l == 0:
        return LcuProgram(ancilla_qubits=0, selects={})
    axis_amps = prep_amplitudes_degeneracy_free(d, l, scheme)
    amounts = shift_amounts(d, l, scheme)
    selects = {}
    for jx in range(2 ** l):
        for jy in range(2 ** l):
            if axis_amps[jx] == 0.0 or axis_amps[jy] == 0.0:
                continue
            gates = []
            if composed_shift(jx, amounts):
                gates.append(shift_operator(
                    ShiftOp("x", composed_shift(jx, amounts), "subtract", n_side_bits)))
            if composed_shift(jy, amounts):
                gates.append(shift_operator(
                    ShiftOp("y", composed_shift(jy, amounts), "subtract", n_side_bits)))
            if len(gates) == 1:
                selects[jx * 2 ** l + jy] = gates[0]
            elif gates:
                selects[jx * 2 ** l + jy] = GateSequence(tuple(gates))
    return LcuProgram(ancilla_qubits=2 * l, selects=selects,
                      prep_amplitudes=np.kron(axis_amps, axis_amps))


def build_conv_program(filt: FilterSpec, n_side_bits: int) -> LcuProgram:
    """Entangled ancilla preparation with amplitude sqrt(w_{dx,dy}) on the
    state selecting shift (dx, dy), so the effective weights are the
    normalized filter entries."""
    d = filt.d
    if d > 2 ** n_side_bits:
        raise ValueError("window larger than the image")
    l = ancilla_bits_for_window(d)
    if l == 0:
        return LcuProgram(ancilla_qubits=0, selects={})
    joint = np.zeros(4 ** l)
    selects = {}
    for dx in range(d):
        for dy in range(d):
            w = filt.weights[dx, dy]
            if w == 0.0:
                continue
            joint[dx * 2 ** l + dy] = np.sqrt(w)
            gates = []
            if dx:
                gates.append(shift_operator(ShiftOp("x", dx, "subtract", n_side_bits)))
            if dy:
                gates.append(shift_operator(ShiftOp("y", dy, "subtract", n_side_bits)))
            if len(gates) == 1:
                selects[dx * 2 ** l + dy] = gates[0]
            elif gates:
                selects[dx * 2 ** l + dy] = GateSequence(tuple(gates))
    return LcuProgram(ancilla_qubits=2 * l, selects=selects,
                      prep_amplitudes=joint / np.linalg.norm(joint))


def pooling_select_circuit(spec: PoolingSpec, n_side_bits: int,
                           scheme: str = ZERO_HIGH_SHIFTS) -> GateSequence:
    """The select stage as explicit singly-controlled shift gates.

    Joint layout: x-axis ancillas, y-axis ancillas, then the x and y image
    registers. The ancilla group bit of significance s controls
    SUBTRACT_{amount[s]} on its axis, giving ceil(log2 D) controlled gates
    per axis.
    """
    l = ancilla_bits_for_window(spec.d)
    amounts = shift_amounts(spec.d, l, scheme)
    gates = []
    for axis, group_start in (("x", 0), ("y", l)):
        for g in range(l):
            significance = l - 1 - g
            shift = shift_operator(
                ShiftOp(axis, amounts[significance], "subtract", n_side_bits))
            gates.append(ControlledGate((group_start + g,), (1,),
                                        _offset_qubits(shift, 2 * l)))
    return GateSequence(tuple(gates))


def _offset_qubits(action: GateAction, offset: int) -> GateAction:
    if isinstance(action, DenseGate):
        return DenseGate(tuple(q + offset for q in action.qubits), action.matrix)
    if isinstance(action, PermutationGate):
        return PermutationGate(tuple(q + offset for q in action.qubits), action.table)
    if isinstance(action, ControlledGate):
        return ControlledGate(tuple(q + offset for q in action.controls), action.values,
                              _offset_qubits(action.action, offset))
    return GateSequence(tuple(_offset_qubits(a, offset) for a in action.actions))


def apply_pooling(state: Statevector, spec: PoolingSpec,
                  scheme: str = ZERO_HIGH_SHIFTS) -> LcuOutcome:
    """Run the pooling program on an encoded image. The circuit always wraps
    periodically on the encoded grid; zero-padded behaviour comes from
    embedding with enough margin first."""
    assert state.num_qubits % 2 == 0
    return run_lcu(build_pool_program(spec, state.num_qubits // 2, scheme), state)


def apply_convolution(state: Statevector, filt: FilterSpec) -> LcuOutcome:
    assert state.num_qubits % 2 == 0
    return run_lcu(build_conv_program(filt, state.num_qubits // 2), state)


def embed_for_mode(img: ImageGrid, spec: PoolingSpec) -> ImageGrid:
    """Grid the circuit runs on: next power of two, with a margin of d - 1
    in zero-padded mode so no window wraps back onto real pixels."""
    side = img.n_side if spec.mode == "periodic" else img.n_side + spec.d - 1
    side = max(2, next_power_of_two(side))
    return embed_image(img, side) if side != img.n_side else img


def pool_image(img: ImageGrid, spec: PoolingSpec,
               scheme: str = ZERO_HIGH_SHIFTS):
    """Encode, pool, and pair the outcome with its classical reference.

    Periodic mode compares on the full encoded grid. Zero-padded mode
    returns the reference on the original extent; the circuit agrees with it
    there because the embedding margin keeps windows off the wrap-around.
    """
    embedded = embed_for_mode(img, spec)
    outcome = apply_pooling(amplitude_encode_image(embedded), spec, scheme)
    if spec.mode == "periodic":
        reference = classical_pool_oracle(embedded, spec)
    else:
        reference = classical_pool_oracle(img, spec)
    return outcome, reference


def encoded_block(state: Statevector, extent: int) -> np.ndarray:
    """Top-left extent x extent block of an encoded image's amplitudes."""
    assert state.num_qubits % 2 == 0
    side = 2 ** (state.num_qubits // 2)
    assert extent <= side
    return state.amps.reshape(side, side)[:extent, :extent]


def pooling_success_probability(img: ImageGrid, spec: PoolingSpec) -> float:
    """Direct formula pi_S = |pooled|^2 / Omega^2 on the grid the circuit
    acts on; no simulation needed."""
    embedded = embed_for_mode(img, spec)
    omega = embedded.norm_constant
    if omega <= 0.0:
        raise ValueError("all-zero image has no success probability")
    pooled = classical_pool_oracle(embedded, PoolingSpec(spec.d, "periodic"))
    return float(pooled.norm_constant ** 2 / omega ** 2)


def flag_discard(state: Statevector, original_extent: int, d: int):
    """Drop window positions that hang off the original image: keep
    x <= N - d and y <= N - d, renormalize, and report the kept mass."""
    assert state.num_qubits % 2 == 0
    side = 2 ** (state.num_qubits // 2)
    limit = original_extent - d
    if limit < 0:
        raise PostSelectionImpossible("window larger than the original image")
    grid = state.amps.reshape(side, side).copy()
    grid[limit + 1:, :] = 0.0
    grid[:, limit + 1:] = 0.0
    keep = float(np.sum(np.abs(grid) ** 2))
    if keep < 1e-14:
        raise PostSelectionImpossible(f"kept mass {keep:.3e}")
    return Statevector(grid.reshape(-1) / np.sqrt(keep)), keep


_IMAGE_MAGIC = 0x00000803
_LABEL_MAGIC = 0x00000801

_MNIST_CANDIDATES = (
    "train-images-idx3-ubyte",
    "train-images.idx3-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-images.idx3-ubyte",
)


def _read_idx_bytes(path) -> bytes:
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as fh:
        return fh.read()


def load_idx_images(path) -> np.ndarray:
    """Images from an IDX file (optionally gzipped), scaled to [0, 1]."""
    raw = _read_idx_bytes(path)
    if len(raw) < 16:
        raise ValueError("file too short for an IDX image header")
    magic, count, rows, cols = struct.unpack(">iiii", raw[:16])
    if magic != _IMAGE_MAGIC:
        raise ValueError(f"bad image-file magic 0x{magic:08x}")
    data = np.frombuffer(raw, dtype=np.uint8, offset=16)
    if data.size != count * rows * cols:
        raise ValueError("image payload size does not match the header")
    return data.reshape(count, rows, cols).astype(float) / 255.0


def load_idx_labels(path) -> np.ndarray:
    raw = _read_idx_bytes(path)
    if len(raw) < 8:
        raise ValueError("file too short for an IDX label header")
    magic, count = struct.unpack(">ii", raw[:8])
    if magic != _LABEL_MAGIC:
        raise ValueError(f"bad label-file magic 0x{magic:08x}")
    data = np.frombuffer(raw, dtype=np.uint8, offset=8)
    if data.size != count:
        raise ValueError("label payload size does not match the header")
    return data.astype(int)


def write_idx_images(path, images) -> None:
    """Inverse of load_idx_images; expects values in [0, 1]."""
    images = np.asarray(images, dtype=float)
    assert images.ndim == 3
    payload = np.round(np.clip(images, 0.0, 1.0) * 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">iiii", _IMAGE_MAGIC, *payload.shape))
        fh.write(payload.tobytes())


def write_idx_labels(path, labels) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">ii", _LABEL_MAGIC, labels.size))
        fh.write(labels.tobytes())


def load_mnist_images(directory, limit: Optional[int] = None) -> np.ndarray:
    """First image file found under the usual MNIST names (raw or .gz)."""
    base = Path(directory)
    for name in _MNIST_CANDIDATES:
        for candidate in (base / name, base / (name + ".gz")):
            if candidate.exists():
                images = load_idx_images(candidate)
                return images[:limit] if limit else images
    raise FileNotFoundError(f"no MNIST image file under {base}")


def downsample_image(img: ImageGrid, new_side: int) -> ImageGrid:
    """Area-average resampling; non-integer scale factors split source
    pixels across target cells proportionally to overlap."""
    if not 1 <= new_side <= img.n_side:
        raise ValueError("target side must be in [1, n_side]")
    weights = _overlap_weights(img.n_side, new_side)
    return ImageGrid(weights @ img.pixels @ weights.T)


def _overlap_weights(src: int, dst: int) -> np.ndarray:
    ratio = src / dst
    weights = np.zeros((dst, src))
    for t in range(dst):
        lo, hi = t * ratio, (t + 1) * ratio
        for s in range(int(lo), min(int(np.ceil(hi)), src)):
            weights[t, s] = min(hi, s + 1) - max(lo, s)
    return weights / ratio


def synthetic_digit_images(count: int, side: int = 28, seed: int = 0,
                           texture: float = 0.6) -> np.ndarray:
    """Stand-in sample for when no IDX files are available.

    Each image holds a few curved pen strokes about a pixel wide over a
    faint texture with a 1/f-style spectrum. The stroke width tracks the
    raster (pen width does not grow with canvas size) and the texture is
    scale-free, so local pixel similarity stays comparable when the images
    are resampled, the way photographs behave.
    """
    rng = np.random.default_rng(seed)
    centers = np.arange(side) + 0.5
    xx, yy = np.meshgrid(centers, centers, indexing="ij")
    k2 = np.fft.fftfreq(side)[:, None] ** 2 + np.fft.fftfreq(side)[None, :] ** 2
    k2[0, 0] = np.inf  # the texture gets no random flat offset
    spectrum = k2 ** -0.5
    stroke_scale = side / 28.0
    images = np.zeros((count, side, side))
    for i in range(count):
        img = np.zeros((side, side))
        for _ in range(int(rng.integers(2, 5))):
            pts = rng.uniform(0.15 * side, 0.85 * side, size=(3, 2))
            t = np.linspace(0.0, 1.0, 160)[:, None]
            curve = (1 - t) ** 2 * pts[0] + 2 * t * (1 - t) * pts[1] + t ** 2 * pts[2]
            sigma = rng.uniform(0.8, 1.6) * stroke_scale
            d2 = ((xx[None] - curve[:, 0, None, None]) ** 2
                  + (yy[None] - curve[:, 1, None, None]) ** 2)
            img += np.exp(-0.5 * d2 / sigma ** 2).max(axis=0)
        img /= img.max()
        phases = rng.normal(size=(side, side)) + 1j * rng.normal(size=(side, side))
        field = np.fft.ifft2(phases * spectrum).real
        field -= field.min()
        img += texture * field / field.max()
        images[i] = img / img.max()
    return images


def mnist_probability_sweep(images, d_values=(), n_values=(), d_for_n: int = 3):
    """Mean and spread of pi_S across a sample of images.

    D rows pool at native size; N rows first resample every image to side N
    and pool with window ``d_for_n``. Probabilities come from the direct
    formula, which matches the full simulation exactly. Rows are
    (kind, parameter, mean, std, n_images).
    """
    grids = [ImageGrid(np.asarray(img, dtype=float)) for img in images]
    assert grids
    rows = []
    for d in d_values:
        probs = [pooling_success_probability(g, PoolingSpec(int(d))) for g in grids]
        rows.append(("D", int(d), float(np.mean(probs)), float(np.std(probs)), len(probs)))
    for n in n_values:
        probs = [pooling_success_probability(downsample_image(g, int(n)),
                                             PoolingSpec(d_for_n))
                 for g in grids]
        rows.append(("N", int(n), float(np.mean(probs)), float(np.std(probs)), len(probs)))
    return rows
