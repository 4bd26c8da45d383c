"""Scenario configuration: YAML file -> validated :class:`Scenario`.

Schema (all keys optional; omitted keys take the shipped defaults)::

    waveform: ofdm | otfs | hybrid
    speeds_kmh: [float, ...]          # each >= 0
    snr_db: [float, ...]
    mod_order: 4 | 16
    frames: int >= 1                  # frames per batch
    min_bits: int >= 10000
    seed: int in [0, 2**64)
    threshold_kmh: float > 0          # hybrid only
    hysteresis_kmh: float >= 0
    csi: symbol | frame
    channel: {profile: eva | single_path | custom, taps: [[delay_ns, power_db], ...]}
    link: {M, N, delta_f, f_c, cp_len: int | auto}
    sensing: {snr_db, cp_len: int | auto, tol_bins, max_targets, stop_ratio, speed_kmh, trials}
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import yaml

from ..channel import PROFILES, default_cp_len, profile_delays
from ..controller import LinkScenario
from ..core import LinkParams
from ..errors import ConfigError, InvalidArgumentError

WAVEFORMS = ("ofdm", "otfs", "hybrid")
MIN_BITS_FLOOR = 10_000


@dataclass(frozen=True)
class SensingConfig:
    snr_db: float = 20.0
    cp_len: int | None = None
    tol_bins: float = 1e-3
    max_targets: int = 1
    stop_ratio: float = 0.05
    speed_kmh: float = 200.0
    trials: int = 200


@dataclass(frozen=True)
class Scenario:
    waveform: str = "hybrid"
    speeds_kmh: tuple[float, ...] = (3.0, 10.0, 30.0, 200.0, 500.0)
    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0)
    mod_order: int = 4
    channel: str = "eva"
    taps: tuple[tuple[float, float], ...] = ()
    frames: int = 8
    min_bits: int = MIN_BITS_FLOOR
    seed: int = 20240611
    threshold_kmh: float = 120.0
    hysteresis_kmh: float = 0.0
    csi: str = "symbol"
    noiseless: bool = False
    link: LinkParams = field(default_factory=lambda: LinkParams(cp_len=1))
    sensing: SensingConfig = field(default_factory=SensingConfig)

    def link_scenario(self, speed_kmh: float, snr_db: float) -> LinkScenario:
        return LinkScenario(
            speed_kmh=speed_kmh,
            snr_db=snr_db,
            mod_order=self.mod_order,
            frames=self.frames,
            channel=self.channel,
            taps=self.taps,
            sensing_snr_db=self.sensing.snr_db,
            sensing_cp_len=self.sensing.cp_len,
            tol_bins=self.sensing.tol_bins,
            max_targets=self.sensing.max_targets,
            stop_ratio=self.sensing.stop_ratio,
            csi=self.csi,
            noiseless=self.noiseless,
        )


def _line_index(text: str) -> dict[tuple, int]:
    """Map key paths to 1-based line numbers."""
    lines: dict[tuple, int] = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                sub = path + (key.value,)
                lines[sub] = key.start_mark.line + 1
                walk(value, sub)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                lines[path + (i,)] = item.start_mark.line + 1
                walk(item, path + (i,))

    if root is not None:
        walk(root, ())
    return lines


class _Reader:
    def __init__(self, raw: dict, lines: dict):
        self.raw = raw
        self.lines = lines

    def fail(self, path: tuple, message: str):
        line = None
        for n in range(len(path), 0, -1):
            if path[:n] in self.lines:
                line = self.lines[path[:n]]
                break
        raise ConfigError(message, ".".join(str(k) for k in path), line)

    def get(self, path: tuple, default):
        node = self.raw
        for key in path:
            if not isinstance(node, dict) or key not in node:
                return default
            node = node[key]
        return node

    def number(self, path, default, kind=float, lo=None, hi=None, lo_open=False):
        value = self.get(path, default)
        if isinstance(value, bool):
            self.fail(path, f"expected a number, got {value!r}")
        try:
            if kind is int and not isinstance(value, int):
                num, exact = int(float(value)), float(value).is_integer()
            else:
                num, exact = kind(value), True
        except (TypeError, ValueError, OverflowError):
            self.fail(path, f"expected a number, got {value!r}")
        if not exact:
            self.fail(path, f"expected an integer, got {value!r}")
        if isinstance(num, float) and math.isnan(num):
            self.fail(path, "NaN is not allowed")
        if lo is not None and (num <= lo if lo_open else num < lo):
            self.fail(path, f"must be {'>' if lo_open else '>='} {lo}, got {num}")
        if hi is not None and num > hi:
            self.fail(path, f"must be <= {hi}, got {num}")
        return num

    def choice(self, path, default, options):
        value = self.get(path, default)
        if value not in options:
            self.fail(path, f"must be one of {list(options)}, got {value!r}")
        return value

    def number_list(self, path, default, lo=None):
        value = self.get(path, default)
        if not isinstance(value, (list, tuple)) or not value:
            self.fail(path, "expected a non-empty list of numbers")
        return tuple(self._item(path, i, v, lo) for i, v in enumerate(value))

    def _item(self, path, i, v, lo):
        if isinstance(v, bool):
            self.fail(path + (i,), f"expected a number, got {v!r}")
        try:
            num = float(v)
        except (TypeError, ValueError):
            self.fail(path + (i,), f"expected a number, got {v!r}")
        if math.isnan(num) or (lo is not None and num < lo):
            self.fail(path + (i,), f"must be >= {lo}, got {v!r}")
        return num

    def auto_int(self, path, default):
        value = self.get(path, default)
        if value in (None, "auto"):
            return None
        return self.number(path, value, kind=int, lo=0)


def parse_scenario(text: str) -> Scenario:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}", line=mark.line + 1 if mark else None)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    r = _Reader(raw, _line_index(text))
    d = Scenario()

    known = {"waveform", "speeds_kmh", "snr_db", "mod_order", "frames", "min_bits", "seed", "threshold_kmh",
             "hysteresis_kmh", "csi", "channel", "link", "sensing", "noiseless"}
    for key in raw:
        if key not in known:
            r.fail((key,), "unknown key")

    profile = r.choice(("channel", "profile"), d.channel, PROFILES)
    taps_raw = r.get(("channel", "taps"), [])
    if not isinstance(taps_raw, list):
        r.fail(("channel", "taps"), "expected a list of [delay_ns, power_db] pairs")
    taps = []
    for i, tap in enumerate(taps_raw):
        if not isinstance(tap, (list, tuple)) or len(tap) != 2:
            r.fail(("channel", "taps", i), "each tap must be [delay_ns, power_db]")
        taps.append((r._item(("channel", "taps", i), 0, tap[0], 0.0), r._item(("channel", "taps", i), 1, tap[1], None)))
    if profile == "custom" and not taps:
        r.fail(("channel", "taps"), "custom profile needs at least one tap")

    M = r.number(("link", "M"), d.link.M, int, lo=2)
    N = r.number(("link", "N"), d.link.N, int, lo=2)
    delta_f = r.number(("link", "delta_f"), d.link.delta_f, lo=0, lo_open=True)
    f_c = r.number(("link", "f_c"), d.link.f_c, lo=0, lo_open=True)
    base = LinkParams(M, N, delta_f, f_c, 0)
    cp = r.auto_int(("link", "cp_len"), "auto")
    if cp is None:
        cp = default_cp_len(profile_delays(profile, taps), base)
    if cp >= M:
        r.fail(("link", "cp_len"), f"cp_len {cp} must be < M = {M}")
    try:
        link = base.with_cp(cp)
    except InvalidArgumentError as exc:
        r.fail(("link",), str(exc))

    s_cp = r.auto_int(("sensing", "cp_len"), "auto")
    if s_cp is not None and s_cp >= M:
        r.fail(("sensing", "cp_len"), f"cp_len {s_cp} must be < M = {M}")
    sensing = SensingConfig(
        snr_db=r.number(("sensing", "snr_db"), d.sensing.snr_db),
        cp_len=s_cp,
        tol_bins=r.number(("sensing", "tol_bins"), d.sensing.tol_bins, lo=0, lo_open=True),
        max_targets=r.number(("sensing", "max_targets"), d.sensing.max_targets, int, lo=1),
        stop_ratio=r.number(("sensing", "stop_ratio"), d.sensing.stop_ratio, lo=0, lo_open=True, hi=0.999999),
        speed_kmh=r.number(("sensing", "speed_kmh"), d.sensing.speed_kmh, lo=0),
        trials=r.number(("sensing", "trials"), d.sensing.trials, int, lo=1),
    )

    noiseless = r.get(("noiseless",), False)
    if not isinstance(noiseless, bool):
        r.fail(("noiseless",), "expected true or false")

    return Scenario(
        waveform=r.choice(("waveform",), d.waveform, WAVEFORMS),
        speeds_kmh=r.number_list(("speeds_kmh",), list(d.speeds_kmh), lo=0.0),
        snr_db=r.number_list(("snr_db",), list(d.snr_db)),
        mod_order=r.choice(("mod_order",), d.mod_order, (4, 16)),
        channel=profile,
        taps=tuple(taps),
        frames=r.number(("frames",), d.frames, int, lo=1),
        min_bits=r.number(("min_bits",), d.min_bits, int, lo=MIN_BITS_FLOOR),
        seed=r.number(("seed",), d.seed, int, lo=0, hi=2**64 - 1),
        threshold_kmh=r.number(("threshold_kmh",), d.threshold_kmh, lo=0, lo_open=True),
        hysteresis_kmh=r.number(("hysteresis_kmh",), d.hysteresis_kmh, lo=0),
        csi=r.choice(("csi",), d.csi, ("symbol", "frame")),
        noiseless=noiseless,
        link=link,
        sensing=sensing,
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_scenario(text)


def default_config_text() -> str:
    return resources.files("ddlink").joinpath("data/default.yaml").read_text()


def default_scenario() -> Scenario:
    return parse_scenario(default_config_text())


def with_overrides(s: Scenario, **changes) -> Scenario:
    return replace(s, **{k: v for k, v in changes.items() if v is not None})
