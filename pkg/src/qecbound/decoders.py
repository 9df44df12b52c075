"""Decoders behind a uniform black-box interface.

A decoder maps a syndrome (int bitmask over detectors) to predicted
observable bits (int bitmask over observables) and is stateless across
shots.  Built-ins: an exact maximum-likelihood lookup table and a greedy
footprint-peeling heuristic.  External decoders attach over a
line-oriented subprocess protocol:

    analyzer -> INIT <n_det> <n_obs>
    decoder  -> READY
    analyzer -> DECODE <k>, then k lines of n_det chars from {0,1}
    decoder  -> k lines of n_obs chars from {0,1}
    analyzer -> QUIT
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass, field

from .compiler import DetectorErrorModel
from .errorspace import bits_to_str, observable_of, str_to_bits, syndrome_of
from .polynomial import MintermEvaluator

ML_CHANNEL_CAP = 24
EXTERNAL_BATCH = 1024


class ProtocolError(RuntimeError):
    pass


def _obs_sort_key(mask: int, n_obs: int):
    # lexicographic on the textual rendering, bit 0 leftmost
    return tuple(mask >> i & 1 for i in range(n_obs))


class Decoder:
    """Base interface; subclasses implement decode(syndrome) -> int."""

    kind: str
    n_det: int
    n_obs: int

    def decode(self, syndrome: int) -> int:
        raise NotImplementedError

    def decode_batch(self, syndromes) -> list[int]:
        return [self.decode(s) for s in syndromes]

    def close(self) -> None:
        pass


@dataclass
class MlDecoder(Decoder):
    """Exact maximum-likelihood lookup built by full error enumeration.

    Ties break toward the all-zeros observable pattern, then
    lexicographically.  Syndromes impossible under the model decode to
    all-zeros.
    """

    n_det: int
    n_obs: int
    table: dict[int, int]
    kind: str = "ml-lookup"

    def decode(self, syndrome: int) -> int:
        return self.table.get(syndrome, 0)


def build_ml_decoder(model: DetectorErrorModel, v, cap: int = ML_CHANNEL_CAP) -> MlDecoder:
    n = model.n_channels
    if n > cap:
        raise ValueError(f"{n} channels exceeds the ML enumeration cap {cap}")
    evaluator = MintermEvaluator(v)
    mass: dict[int, dict[int, float]] = {}
    for e in range(1 << n):
        s = syndrome_of(model, e)
        o = observable_of(model, e)
        mass.setdefault(s, {})
        mass[s][o] = mass[s].get(o, 0.0) + evaluator(e)
    table = {}
    for s, classes in mass.items():
        best = min(
            classes.items(),
            key=lambda kv: (-kv[1], kv[0] != 0, _obs_sort_key(kv[0], model.n_observables)),
        )
        table[s] = best[0]
    return MlDecoder(model.n_detectors, model.n_observables, table)


@dataclass
class GreedyDecoder(Decoder):
    """Greedy footprint peeling: repeatedly XOR in the channel whose
    detector footprint best covers the residual syndrome."""

    model: DetectorErrorModel
    kind: str = "greedy"

    def __post_init__(self) -> None:
        self.n_det = self.model.n_detectors
        self.n_obs = self.model.n_observables
        probs = self.model.concrete_probabilities()
        # static tie-break order: higher probability, then lower index
        self._order = sorted(range(self.model.n_channels), key=lambda i: (-probs[i], i))

    def decode(self, syndrome: int) -> int:
        residual = syndrome
        answer = 0
        while residual:
            best_i = None
            best_score = 0
            for i in self._order:
                fp = self.model.det_footprints[i]
                score = (fp & residual).bit_count() - (fp & ~residual).bit_count()
                if score > best_score:
                    best_score = score
                    best_i = i
            if best_i is None:
                break  # documented give-up: no channel makes progress
            residual ^= self.model.det_footprints[best_i]
            answer ^= self.model.obs_footprints[best_i]
        return answer


def build_greedy_decoder(model: DetectorErrorModel, v=None) -> GreedyDecoder:
    if v is not None:
        model = model.with_probabilities(v)
    return GreedyDecoder(model)


@dataclass
class ExternalDecoder(Decoder):
    """Client side of the subprocess wire protocol."""

    command: str
    n_det: int
    n_obs: int
    kind: str = "external"
    batch_size: int = EXTERNAL_BATCH
    _proc: subprocess.Popen = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._proc = subprocess.Popen(
            shlex.split(self.command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._send(f"INIT {self.n_det} {self.n_obs}")
        ready = self._recv()
        if ready != "READY":
            raise ProtocolError(f"expected READY, got {ready!r}")

    def _send(self, line: str) -> None:
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
        except BrokenPipeError as exc:
            raise ProtocolError("decoder process closed its input") from exc

    def _recv(self) -> str:
        assert self._proc.stdout is not None
        line = self._proc.stdout.readline()
        if not line:
            raise ProtocolError("decoder process closed its output")
        return line.rstrip("\n")

    def decode(self, syndrome: int) -> int:
        return self.decode_batch([syndrome])[0]

    def decode_batch(self, syndromes) -> list[int]:
        out: list[int] = []
        syndromes = list(syndromes)
        for start in range(0, len(syndromes), self.batch_size):
            chunk = syndromes[start : start + self.batch_size]
            self._send(f"DECODE {len(chunk)}")
            for s in chunk:
                self._send(bits_to_str(s, self.n_det))
            for _ in chunk:
                line = self._recv()
                if len(line) != self.n_obs or set(line) - {"0", "1"}:
                    raise ProtocolError(f"malformed decoder reply {line!r}")
                out.append(str_to_bits(line))
        return out

    def close(self) -> None:
        try:
            self._send("QUIT")
        except ProtocolError:
            pass
        self._proc.wait(timeout=10)


def connect_external_decoder(command: str, n_det: int, n_obs: int) -> ExternalDecoder:
    """Spawn `command` and perform the wire-protocol handshake."""
    return ExternalDecoder(command, n_det, n_obs)


def serve(decoder: Decoder, stdin, stdout) -> None:
    """Server side of the wire protocol (used by `qecbound serve-ml`)."""
    init = stdin.readline().split()
    if len(init) != 3 or init[0] != "INIT":
        raise ProtocolError(f"bad handshake {init!r}")
    n_det, n_obs = int(init[1]), int(init[2])
    if n_det != decoder.n_det or n_obs != decoder.n_obs:
        raise ProtocolError(
            f"dimension mismatch: got {n_det}x{n_obs}, "
            f"serving {decoder.n_det}x{decoder.n_obs}"
        )
    stdout.write("READY\n")
    stdout.flush()
    while True:
        line = stdin.readline()
        if not line or line.strip() == "QUIT":
            return
        toks = line.split()
        if toks[0] != "DECODE":
            raise ProtocolError(f"unexpected command {line!r}")
        k = int(toks[1])
        for _ in range(k):
            s = stdin.readline().strip()
            if len(s) != n_det or set(s) - {"0", "1"}:
                raise ProtocolError(f"malformed syndrome {s!r}")
            pred = decoder.decode(str_to_bits(s))
            stdout.write(bits_to_str(pred, n_obs) + "\n")
        stdout.flush()
