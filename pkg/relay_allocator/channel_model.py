"""Frequency-selective Rayleigh channels for the four relay links and their fixture files.

Each link's frequency response is the N-point DFT of ``n_taps`` i.i.d. unit-variance
circularly-symmetric complex Gaussian taps, scaled by 1/sqrt(n_taps) so that every
subcarrier has unit average power gain. The master seed is split into four
independent streams (one per link) with ``numpy.random.SeedSequence.spawn``.
"""

from pathlib import Path

import numpy as np

from relay_allocator.constants import ALLOCATION_KEYS, LINKS
from relay_allocator.dtos import ChannelRealization, PowerAllocation
from relay_allocator.exceptions import ChannelError, ChannelFileError


def _link_gain(rng: np.random.Generator, n_subcarriers: int, n_taps: int) -> np.ndarray:
    taps = (rng.standard_normal(n_taps) + 1j * rng.standard_normal(n_taps)) / np.sqrt(2.0)
    response = np.fft.fft(taps, n=n_subcarriers) / np.sqrt(n_taps)
    return np.abs(response) ** 2


def generate_channel(n_subcarriers: int, n_taps: int, seed: int) -> ChannelRealization:
    if n_subcarriers < 1 or n_taps < 1:
        raise ChannelError(
            f"sizes must be positive, got N={n_subcarriers} taps={n_taps}"
        )
    if n_taps > n_subcarriers:
        raise ChannelError(f"n_taps={n_taps} exceeds n_subcarriers={n_subcarriers}")

    streams = np.random.SeedSequence(seed).spawn(len(LINKS))
    gains = {
        name: _link_gain(np.random.default_rng(stream), n_subcarriers, n_taps)
        for name, stream in zip(LINKS, streams)
    }
    return ChannelRealization(seed=seed, n_taps=n_taps, **gains)


def realization_seed(master_seed: int, *indices: int) -> int:
    """Deterministic sub-seed for a (master, index, ...) tuple."""
    sequence = np.random.SeedSequence([master_seed, *indices])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def generate_channels(
    count: int, n_subcarriers: int, n_taps: int, seed: int
) -> list[ChannelRealization]:
    return [
        generate_channel(n_subcarriers, n_taps, realization_seed(seed, index))
        for index in range(count)
    ]


def format_values(values: np.ndarray) -> str:
    return " ".join(f"{value:.16e}" for value in values)


def save_channel(ch: ChannelRealization, path) -> None:
    lines = [f"N={ch.n_subcarriers} taps={ch.n_taps} seed={ch.seed}"]
    lines += [f"{name}: {format_values(values)}" for name, values in ch.gains().items()]
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as e:
        raise ChannelFileError(path, f"cannot write file ({e})") from e


def parse_header(path, line: str, keys: tuple[str, ...]) -> dict[str, str]:
    fields = dict(item.split("=", 1) for item in line.split() if "=" in item)
    missing = [key for key in keys if key not in fields]
    if missing:
        raise ChannelFileError(path, f"header is missing {', '.join(missing)}", line=1)
    return fields


def parse_vector(path, lines: list[str], index: int, name: str, size: int) -> np.ndarray:
    if index >= len(lines):
        raise ChannelFileError(path, f"missing '{name}:' line", line=index + 1)
    label, _, payload = lines[index].partition(":")
    if label.strip() != name:
        raise ChannelFileError(
            path, f"expected '{name}:' but found '{label.strip()}'", line=index + 1
        )
    try:
        values = np.array([float(token) for token in payload.split()])
    except ValueError as e:
        raise ChannelFileError(path, f"bad number in '{name}' ({e})", line=index + 1) from e
    if values.size != size:
        raise ChannelFileError(
            path, f"'{name}' has {values.size} values, expected {size}", line=index + 1
        )
    if not np.all(np.isfinite(values)):
        raise ChannelFileError(path, f"'{name}' holds a non-finite value", line=index + 1)
    return values


def load_channel(path) -> ChannelRealization:
    try:
        lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    except OSError as e:
        raise ChannelFileError(path, f"cannot read file ({e})") from e
    if not lines:
        raise ChannelFileError(path, "empty file")

    header = parse_header(path, lines[0], ("N", "taps", "seed"))
    try:
        n_subcarriers, n_taps, seed = (int(header[key]) for key in ("N", "taps", "seed"))
    except ValueError as e:
        raise ChannelFileError(path, f"bad header value ({e})", line=1) from e

    gains = {
        name: parse_vector(path, lines, index, name, n_subcarriers)
        for index, name in enumerate(LINKS, start=1)
    }
    if any(np.any(values < 0) for values in gains.values()):
        raise ChannelFileError(path, "gains must be nonnegative")
    return ChannelRealization(seed=seed, n_taps=n_taps, **gains)


def save_allocation(pa: PowerAllocation, path, scheme: str) -> None:
    lines = [f"N={pa.n_subcarriers} scheme={scheme}"]
    lines += [f"{name}: {format_values(getattr(pa, name))}" for name in ALLOCATION_KEYS]
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as e:
        raise ChannelFileError(path, f"cannot write file ({e})") from e


def load_allocation(path) -> tuple[PowerAllocation, str]:
    try:
        lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    except OSError as e:
        raise ChannelFileError(path, f"cannot read file ({e})") from e
    if not lines:
        raise ChannelFileError(path, "empty file")

    header = parse_header(path, lines[0], ("N", "scheme"))
    try:
        n_subcarriers = int(header["N"])
    except ValueError as e:
        raise ChannelFileError(path, f"bad header value ({e})", line=1) from e
    powers = {
        name: parse_vector(path, lines, index, name, n_subcarriers)
        for index, name in enumerate(ALLOCATION_KEYS, start=1)
    }
    if any(np.any(values < 0) for values in powers.values()):
        raise ChannelFileError(path, "powers must be nonnegative")
    return PowerAllocation(**powers), header["scheme"]
